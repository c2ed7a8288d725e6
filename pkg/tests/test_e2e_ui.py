"""Live-service end-to-end: boots the HTTP service on a random port and runs
the navigator's e2e script (frontend/e2e/run_e2e.mjs) against it with node.

Covers the clinician flow: stepwise entry of ph+ / age 30 / no comorbidities
down to the induction treatment recommendation, widening the AYA age bound so
age 40 flips to eligible, and a free-text question answered with the
generated query attached.
"""

import shutil
import socket
import subprocess
import sys
import time
from pathlib import Path

import pytest

from dkg import fixtures

REPO = Path(__file__).resolve().parents[1]
E2E_SCRIPT = REPO / "frontend" / "e2e" / "run_e2e.mjs"


def _free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


@pytest.mark.skipif(shutil.which("node") is None, reason="node not available")
def test_ui_flow_through_live_service(tmp_path):
    snap = tmp_path / "all.snap"
    fixtures.load_guideline().save(snap)
    port = _free_port()
    server = subprocess.Popen(
        [
            sys.executable,
            "-m",
            "dkg.cli",
            "serve",
            "--snapshot",
            str(snap),
            "--bind",
            f"127.0.0.1:{port}",
        ],
        stdout=subprocess.PIPE,
        stderr=subprocess.STDOUT,
        text=True,
    )
    try:
        deadline = time.monotonic() + 20
        while time.monotonic() < deadline:
            try:
                with socket.create_connection(("127.0.0.1", port), timeout=0.3):
                    break
            except OSError:
                if server.poll() is not None:
                    pytest.fail(f"service exited early:\n{server.stdout.read()}")
                time.sleep(0.2)
        else:
            pytest.fail("service did not start listening in time")

        result = subprocess.run(
            ["node", str(E2E_SCRIPT)],
            env={"SERVICE_URL": f"http://127.0.0.1:{port}", "PATH": "/usr/bin:/bin:/usr/local/bin"},
            capture_output=True,
            text=True,
            timeout=60,
        )
        assert result.returncode == 0, f"stdout:\n{result.stdout}\nstderr:\n{result.stderr}"
        assert "e2e complete" in result.stdout
    finally:
        server.terminate()
        server.wait(timeout=10)
