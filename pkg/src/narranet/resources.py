"""Paths of the data files shipped with the package."""
from importlib import resources


def data_path(*parts):
    return resources.files("narranet").joinpath("data", *parts)


def default_lexicon_path():
    return data_path("lexicon_en.txt")


def lesmiserables_dir():
    return data_path("lesmiserables")


def lesmiserables_text():
    """Location of the novel's plain text, or None when it is not installed.

    The ``NARRANET_LESMIS_TEXT`` environment variable takes precedence over a
    copy placed next to the bundled configuration.
    """
    import os
    from pathlib import Path

    env = os.environ.get("NARRANET_LESMIS_TEXT")
    if env:
        p = Path(env).expanduser()
        return p if p.is_file() else None
    p = Path(str(lesmiserables_dir())) / "lesmiserables.txt"
    return p if p.is_file() else None
