"""Shared fixtures: a small annotated dataset, a cheap trained model, and the
acceptance-criterion reporter that prints one line per criterion at the end."""

from contextlib import contextmanager

import pytest

from m3gen.bot import BotConfig
from m3gen.dataset import annotate, generate_main_style
from m3gen.model import ModelConfig, load_checkpoint, train

CRITERIA_LINES: list[str] = []


@pytest.fixture(scope="session")
def criterion():
    """Context manager recording a pass/fail line per acceptance criterion."""

    @contextmanager
    def _criterion(number: int, description: str):
        try:
            yield
        except BaseException as exc:
            CRITERIA_LINES.append(
                f"criterion {number:02d}: FAIL - {description} [{type(exc).__name__}: {exc}]"
            )
            raise
        CRITERIA_LINES.append(f"criterion {number:02d}: PASS - {description}")

    return _criterion


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if CRITERIA_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(CRITERIA_LINES):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def shared_manifest():
    # Seed/count chosen so at least one size has 3 TRAIN levels (tile
    # distribution buckets need that) and m_min sits below the validity line.
    levels = generate_main_style(36, seed=505)
    manifest = annotate(levels, BotConfig(run_count=6, base_seed=40), generator_seed=505)
    assert manifest.m_max > manifest.m_min
    assert manifest.m_min <= 20.0
    return manifest


@pytest.fixture(scope="session")
def tiny_checkpoint_and_manifest(shared_manifest, tmp_path_factory):
    """A cheaply trained (not converged) avalon checkpoint for plumbing tests."""
    cfg = ModelConfig(
        variant="avalon",
        encoder_filters=(4, 4, 8),
        decoder_filters=(4, 4, 3),
        learning_rate=1e-3,
        epochs=12,
        checkpoint_interval=12,
        seed=505,
    )
    result = train(shared_manifest, cfg, tmp_path_factory.mktemp("tiny_ckpt"))
    return load_checkpoint(result.checkpoint_paths[-1]), shared_manifest
