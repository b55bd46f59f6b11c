import json
import os
from datetime import datetime, timezone

import pytest
import yaml

from leadharness import experiment, transcript
from leadharness.__main__ import main
from leadharness.config import parse_config
from leadharness.errors import ConfigError, TranscriptError


NOW = datetime(2025, 1, 2, 3, 4, 5, tzinfo=timezone.utc)

CONFIG = {
    'strategy': {'strategy': 'lead', 'v': 3, 'k': 3, 'h': 2, 't': 2},
    'agent': {
        'kind': 'mock',
        'profile': {
            'per_step_error': {1: 0.5, 3: 0.5}, 'consistency': 1.0,
            'cond_error': 0.05, 'seed': 5},
    },
    'plan': {
        'puzzle': 'checkers', 'sizes': [2, 3], 'episodes': 4, 'seed': 1,
        'profile_samples': 4, 'positional_samples': 4,
    },
}


def make_config(tmp_path, **plan):
    data = json.loads(json.dumps(CONFIG))
    data['plan'].update(out_dir=str(tmp_path), **plan)
    return parse_config(data)


def write_config(tmp_path, **plan):
    data = make_config(tmp_path, **plan).model_dump(mode='json')
    path = tmp_path / 'config.yaml'
    path.write_text(yaml.safe_dump(data))
    return str(path)


def output_files(run_dir):
    '''Every transcript and summary file under run_dir, by relative path.'''
    result = {}
    for root, _, files in os.walk(run_dir):
        for name in files:
            if name == experiment.MANIFEST:
                continue
            path = os.path.join(root, name)
            with open(path, 'rb') as source:
                result[os.path.relpath(path, run_dir)] = source.read()
    return result


def test_run_layout(tmp_path):
    config = make_config(tmp_path)
    run_dir, manifest, records = experiment.run_experiment(
        config, 'first', NOW)
    assert run_dir == os.path.join(str(tmp_path), 'first')
    assert len(records) == 8
    assert os.path.isfile(
        experiment.transcript_path(run_dir, 'checkers', 3, 3))
    assert os.path.isfile(os.path.join(run_dir, 'summary', 'success.csv'))
    assert manifest.totals['episodes'] == 8
    assert manifest.totals['calls'] == sum(r.calls for r in records)

    read_back = experiment.RunManifest.read(run_dir)
    assert read_back == manifest
    assert read_back.config['plan']['seed'] == 1
    assert read_back.timestamp == NOW.isoformat()


def test_default_run_id(tmp_path):
    run_dir, manifest, _ = experiment.run_experiment(
        make_config(tmp_path, sizes=[2], episodes=1), now=NOW)
    assert manifest.run_id == 'lead-checkers-s1-20250102T030405'
    assert os.path.basename(run_dir) == manifest.run_id


def test_runs_repeat_exactly(tmp_path):
    config = make_config(tmp_path)
    first, _, _ = experiment.run_experiment(config, 'first', NOW)
    second, _, _ = experiment.run_experiment(config, 'second', NOW)
    files = output_files(first)
    assert len(files) == 8 + len(os.listdir(os.path.join(first, 'summary')))
    assert files == output_files(second)


def test_parallel_matches_serial(tmp_path):
    serial, _, _ = experiment.run_experiment(
        make_config(tmp_path), 'serial', NOW)
    parallel, _, _ = experiment.run_experiment(
        make_config(tmp_path, parallel=3), 'parallel', NOW)
    assert output_files(serial) == output_files(parallel)


def test_different_seed_differs(tmp_path):
    first, _, _ = experiment.run_experiment(
        make_config(tmp_path), 'first', NOW)
    second, _, _ = experiment.run_experiment(
        make_config(tmp_path, seed=2), 'second', NOW)
    assert output_files(first) != output_files(second)


def test_replayed_records_match(tmp_path):
    run_dir, _, records = experiment.run_experiment(
        make_config(tmp_path), 'run', NOW)
    replayed = experiment.load_records(run_dir)

    def key(record):
        return record.n, record.episode

    assert [r.summary() for r in sorted(replayed, key=key)] == [
        r.summary() for r in sorted(records, key=key)]


def test_budget_checked_before_running(tmp_path):
    data = json.loads(json.dumps(CONFIG))
    data['strategy']['step_budget'] = 9
    data['plan'].update(out_dir=str(tmp_path), sizes=[2, 3])
    with pytest.raises(ConfigError):
        experiment.run_experiment(parse_config(data), 'run', NOW)
    assert not os.path.exists(os.path.join(str(tmp_path), 'run', 'summary'))


def test_analyze(tmp_path):
    run_dir, _, _ = experiment.run_experiment(
        make_config(tmp_path), 'run', NOW)
    paths = experiment.analyze([run_dir], str(tmp_path / 'analysis'))
    names = sorted(os.path.basename(p) for p in paths)
    assert 'success.csv' in names
    assert 'tv_distance.csv' in names
    assert 'rank_order.csv' in names
    assert 'positional_checkers_n3.csv' in names
    assert 'positional_conditioned_checkers_n2.csv' in names


def test_analyze_nothing(tmp_path):
    with pytest.raises(TranscriptError):
        experiment.analyze([str(tmp_path)], str(tmp_path / 'analysis'))


def test_profile(tmp_path):
    directories = experiment.run_profile(
        make_config(tmp_path), compare_lookahead=True)
    assert [os.path.basename(d) for d in directories] == [
        'checkers-n2', 'checkers-n3']
    names = sorted(os.listdir(directories[1]))
    assert names == [
        'competence_barrier.csv', 'positional.csv',
        'positional_conditioned.csv', 'rank_order.csv',
        'step_error_histogram.csv', 'step_errors.csv']


# ---------------------------------------------------------------------------
# Command line

def test_solve(capsys):
    assert main(['solve', 'hanoi', '2']) == 0
    assert capsys.readouterr().out == '''\
solution = [
  {'move': [1, 0, 1], 'state': [[2], [1], []]},
  {'move': [2, 0, 2], 'state': [[], [1], [2]]},
  {'move': [1, 1, 2], 'state': [[], [], [2, 1]]},
]
'''


def test_solve_step_ids(capsys):
    assert main(['solve', 'checkers', '1', '--step-ids']) == 0
    out = capsys.readouterr().out
    assert "{'step_id': 1, 'move': ['R', 0, 1]" in out
    assert out.count('step_id') == 3


def test_solve_bad_size(capsys):
    assert main(['solve', 'hanoi', '0']) == 2
    assert 'configuration error' in capsys.readouterr().err


def test_cli_run(tmp_path, capsys):
    path = write_config(tmp_path, sizes=[2], episodes=2)
    assert main([
        '--config', path, '--out-dir', str(tmp_path / 'runs'), 'run',
        '--run-id', 'cli']) == 0
    assert '2 episodes succeeded' in capsys.readouterr().out
    run_dir = tmp_path / 'runs' / 'cli'
    assert (run_dir / experiment.MANIFEST).is_file()

    episode = experiment.transcript_path(str(run_dir), 'checkers', 2, 1)
    assert main(['replay', episode]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary == transcript.replay(episode).summary()

    assert main([
        '--out-dir', str(tmp_path / 'runs'), 'analyze', str(run_dir)]) == 0
    assert (tmp_path / 'runs' / 'analysis' / 'success.csv').is_file()


def test_cli_require_success(tmp_path, capsys):
    data = make_config(tmp_path, sizes=[2], episodes=2).model_dump(
        mode='json')
    data['strategy'] = {'strategy': 'atomic'}
    data['agent']['profile'] = {'per_step_error': {0: 1.0}}
    path = tmp_path / 'failing.yaml'
    path.write_text(yaml.safe_dump(data))
    args = ['--config', str(path), 'run', '--run-id', 'failing']
    assert main(args + ['--require-success']) == 1
    assert main(args) == 0


def test_cli_seed_override(tmp_path):
    path = write_config(tmp_path, sizes=[2], episodes=1)
    assert main(['--config', path, '--seed', '9', 'run', '--run-id', 'x']) \
        == 0
    manifest = experiment.RunManifest.read(str(tmp_path / 'x'))
    assert manifest.config['plan']['seed'] == 9


@pytest.mark.parametrize(
    "args", [
        ['run'],
        ['--config', 'preset:no_such_preset', 'run'],
        ['--config', '/no/such/config.yaml', 'profile'],
    ])
def test_cli_config_errors(args, capsys):
    assert main(args) == 2
    assert 'configuration error' in capsys.readouterr().err


def test_cli_bad_transcript(tmp_path, capsys):
    path = tmp_path / 'bad.jsonl'
    path.write_text('not json\n')
    assert main(['replay', str(path)]) == 1
    assert 'line 1' in capsys.readouterr().err


def test_cli_profile(tmp_path, capsys):
    path = write_config(tmp_path, sizes=[2])
    assert main(['--config', path, 'profile']) == 0
    out = capsys.readouterr().out.split()
    assert out == [os.path.join(str(tmp_path), 'profile', 'checkers-n2')]
