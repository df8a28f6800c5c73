"""Bundled ready-to-run scenario files, addressable by bare name."""

from __future__ import annotations

from importlib.resources import files

__all__ = ["preset_names", "preset_text", "preset_description"]


def _preset_dir():
    return files("expertcompare.presets")


def preset_names() -> list[str]:
    """Names of all bundled scenarios, stable-sorted."""
    return sorted(
        entry.name[: -len(".scenario")]
        for entry in _preset_dir().iterdir()
        if entry.name.endswith(".scenario")
    )


def preset_text(name: str) -> str:
    """Raw text of a bundled scenario file."""
    resource = _preset_dir().joinpath(f"{name}.scenario")
    if not resource.is_file():
        raise KeyError(f"no preset named {name!r}; known: {preset_names()}")
    return resource.read_text(encoding="utf-8")


def preset_description(name: str) -> str:
    """The description line of a bundled scenario."""
    for line in preset_text(name).splitlines():
        stripped = line.strip()
        if stripped.startswith("description"):
            return stripped.split("=", 1)[1].strip()
    return ""
