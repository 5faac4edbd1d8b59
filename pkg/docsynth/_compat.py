"""
docsynth._compat
~~~~~~~~~~~~~~~~

Compatibility shims for the supported Python versions.
"""

import sys
import typing as t

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = ["tomllib", "load_toml"]


def load_toml(fp: t.BinaryIO) -> dict[str, t.Any]:
    """
    TOML loader for :meth:`flask.Config.from_file`.

    Top-level keys are upper-cased, since ``Config`` only keeps upper-case
    keys; nested keys are left alone.
    """
    data = tomllib.load(fp)
    return {key.upper(): value for key, value in data.items()}
