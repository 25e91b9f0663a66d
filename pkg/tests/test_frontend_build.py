"""Build the annotator UI and run its own test suite through npm."""

import shutil
import subprocess
from pathlib import Path

import pytest

FRONTEND = Path(__file__).resolve().parents[1] / "frontend"

pytestmark = pytest.mark.skipif(
    shutil.which("npm") is None or shutil.which("tsc") is None,
    reason="npm and tsc are required to build the UI",
)


def test_bundle_builds():
    result = subprocess.run(
        ["npm", "run", "build"], cwd=FRONTEND, capture_output=True, text=True, timeout=300
    )
    assert result.returncode == 0, result.stdout + result.stderr
    assert (FRONTEND / "dist" / "index.html").exists()
    assert (FRONTEND / "dist" / "assets" / "main.js").exists()


def test_frontend_unit_suite_passes():
    result = subprocess.run(
        ["npm", "test"], cwd=FRONTEND, capture_output=True, text=True, timeout=300
    )
    assert result.returncode == 0, result.stdout + result.stderr
    assert "# fail 0" in result.stdout
