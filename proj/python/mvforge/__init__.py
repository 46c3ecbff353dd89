"""Python access to the mvforge core library."""

from ._mvforge import *  # noqa: F401,F403
from ._mvforge import __doc__  # noqa: F401


def main() -> None:
    import sys

    code, out, err = run_cli(sys.argv[1:])  # noqa: F405
    sys.stdout.write(out)
    sys.stderr.write(err)
    raise SystemExit(code)
