"""Shipped derivations, theories, signatures and the mutation suite."""
import json
from pathlib import Path

DIR = Path(__file__).parent


def path(name: str) -> Path:
    return DIR / name


def manifest() -> dict:
    return json.loads(path("manifest.json").read_text(encoding="utf-8"))
