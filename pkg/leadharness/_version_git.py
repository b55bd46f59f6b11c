# Version number and source revision from a git checkout or archive.
# setup.py imports this file directly, so it must not import the package.
import os
import re
from subprocess import DEVNULL, check_output

# Filled in by git archive (export-subst) or by the setup.py cmdclasses
GIT_REFS = "$Format:%D$"
GIT_SHA1 = "$Format:%h$"

# sha1, last version-like tag and commits since then, marking local edits
DESCRIBE = (
    "git describe --tags --dirty --always --long --match=[0-9]*[-.][0-9]*")


def _describe(path):
    # output is TAG-NUM-gHEX[-dirty] or HEX[-dirty]
    out = check_output(
        DESCRIBE.split(), stderr=DEVNULL, cwd=path).decode().strip()
    dirty = out.endswith("-dirty")
    if dirty:
        out = out[:-len("-dirty")]
    match = re.search(r"^(.+)-(\d+)-g([0-9a-f]+)$", out)
    if match:
        tag, plus, sha1 = match.groups()
    else:
        tag, plus, sha1 = "0.0", "untagged", out
    return tag, plus, sha1, dirty


def get_version_from_git(path=None):
    """Returns (version, sha1, error).  A checkout is asked with git
    describe, an archive or installed copy uses the substituted strings."""
    if not GIT_SHA1.startswith("$"):
        tag, plus, sha1, dirty = "0.0", "untagged", GIT_SHA1, False
        for ref_name in GIT_REFS.split(", "):
            if ref_name.startswith("tag: "):
                tag, plus = ref_name[len("tag: "):], "0"
    else:
        if path is None:
            path = os.path.dirname(os.path.abspath(__file__))
        try:
            tag, plus, sha1, dirty = _describe(path)
        except Exception as e:
            return "0.0+unknown", None, e
    tag = tag.replace("-", ".")
    if plus != "0" or dirty:
        tag = "%s+%s.g%s%s" % (tag, plus, sha1, ".dirty" if dirty else "")
    return tag, sha1, None


__version__, git_sha1, git_error = get_version_from_git()


def source_revision():
    """Revision tag recorded in run manifests: the version and, when known,
    the commit it was built from."""
    if git_sha1 is None or git_sha1 in __version__:
        return __version__
    return "%s (%s)" % (__version__, git_sha1)


def get_cmdclass(build_py=None, sdist=None):
    """cmdclass for setuptools.setup that freezes the version strings into
    the _version_git.py of built wheels and sdists"""
    if build_py is None:
        from setuptools.command.build_py import build_py
    if sdist is None:
        from setuptools.command.sdist import sdist

    def freeze(base_dir, pkg):
        target = os.path.join(base_dir, pkg.split(".")[0], "_version_git.py")
        if not os.path.isfile(target):
            return
        with open(target) as f:
            lines = f.readlines()
        with open(target, "w") as f:
            for line in lines:
                if line.startswith("GIT_SHA1 = "):
                    line = "GIT_SHA1 = %r\n" % git_sha1
                elif line.startswith("GIT_REFS = "):
                    line = "GIT_REFS = %r\n" % ("tag: " + __version__)
                f.write(line)

    class BuildPy(build_py):
        def run(self):
            build_py.run(self)
            for pkg in self.packages:
                freeze(self.build_lib, pkg)

    class Sdist(sdist):
        def make_release_tree(self, base_dir, files):
            sdist.make_release_tree(self, base_dir, files)
            for pkg in self.distribution.packages:
                freeze(base_dir, pkg)

    return dict(build_py=BuildPy, sdist=Sdist)
