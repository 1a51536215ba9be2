from __future__ import annotations

import os
from dataclasses import replace
from pathlib import Path

import pytest

from artutor import config as config_mod
from artutor import knowledge_base

REPO_ROOT = Path(__file__).resolve().parents[1]


@pytest.fixture(autouse=True)
def run_from_repo_root(monkeypatch):
    monkeypatch.chdir(REPO_ROOT)


@pytest.fixture
def cfg():
    # No log files on disk; tests inspect the in-memory log.
    base = config_mod.load()
    return replace(base, logs_dir="")


@pytest.fixture
def kb(cfg):
    return knowledge_base.load(cfg.kb_path)
