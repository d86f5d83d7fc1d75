"""
conftest.py – pytest hooks and shared fixtures for the robinlab suite.

Collects per-test pass/fail/skip results and writes:
  - reports/robinlab_test_report.json   (machine-readable)
  - console table summary               (printed after the session)

The HTML report is produced by pytest-html; pass
  --html=reports/robinlab_test_report.html
to run_tests.sh / pytest directly.

The p-sweeps are expensive, so they are built once per session and shared by
test_asymptotics.py, test_viscosity.py and test_cli.py.
"""
import json
import os
import sys
from datetime import datetime, timezone

import pytest
from dotenv import load_dotenv

_HERE = os.path.dirname(os.path.abspath(__file__))
_REPO_ROOT = os.path.dirname(_HERE)
REPORT_DIR = os.path.join(_HERE, "reports")

if _REPO_ROOT not in sys.path:
    sys.path.insert(0, _REPO_ROOT)

load_dotenv(os.path.join(_HERE, ".env"), override=False)
load_dotenv(os.path.join(_REPO_ROOT, ".env"), override=False)

from robinlab import asymptotics  # noqa: E402
from robinlab.geometry import Ball, Interval  # noqa: E402

SWEEP_EXPONENTS = (2.0, 4.0, 8.0, 16.0, 32.0, 64.0)
SWEEP_RESOLUTION = 128


def pytest_configure(config):
    os.makedirs(REPORT_DIR, exist_ok=True)


# ---------------------------------------------------------------------------
# Shared sweeps
# ---------------------------------------------------------------------------

@pytest.fixture(scope="session")
def interval_sweep():
    """Radial sweep on Interval(-1, 1), β = 1."""
    return asymptotics.sweep_p(Interval(-1.0, 1.0), 1.0, SWEEP_EXPONENTS, resolution=SWEEP_RESOLUTION)


@pytest.fixture(scope="session")
def interval_sweep_beta2():
    return asymptotics.sweep_p(Interval(-1.0, 1.0), 2.0, SWEEP_EXPONENTS, resolution=SWEEP_RESOLUTION)


@pytest.fixture(scope="session")
def ball_sweep():
    """Radial sweep on Ball(2, 1), β = 1."""
    return asymptotics.sweep_p(Ball(2, 1.0), 1.0, SWEEP_EXPONENTS, resolution=SWEEP_RESOLUTION)


@pytest.fixture(scope="session")
def ball_sweep_beta2():
    return asymptotics.sweep_p(Ball(2, 1.0), 2.0, SWEEP_EXPONENTS, resolution=SWEEP_RESOLUTION)


# ---------------------------------------------------------------------------
# Result collector
# ---------------------------------------------------------------------------

class _ResultCollector:
    def __init__(self):
        self.results: list[dict] = []

    def record(self, name: str, module: str, outcome: str, duration: float, error: str | None = None):
        self.results.append(
            {
                "name": name,
                "module": module,
                "outcome": outcome,       # PASSED / FAILED / SKIPPED / ERROR
                "duration_s": round(duration, 3),
                "error": error,
                "timestamp": datetime.now(timezone.utc).isoformat(),
            }
        )


_collector = _ResultCollector()


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()

    # the call phase, or setup when a fixture (e.g. a sweep) blew up
    if report.when == "call" or (report.when == "setup" and report.failed):
        error_text = None
        if report.failed:
            status = "FAILED" if report.when == "call" else "ERROR"
            error_text = str(report.longrepr) if report.longrepr else None
        elif report.skipped:
            status = "SKIPPED"
            error_text = str(report.longrepr) if report.longrepr else None
        else:
            status = "PASSED"

        _collector.record(
            name=item.name,
            module=item.module.__name__ if item.module else "",
            outcome=status,
            duration=report.duration,
            error=error_text,
        )


# ---------------------------------------------------------------------------
# Session-finish: write JSON + print table
# ---------------------------------------------------------------------------

def pytest_sessionfinish(session, exitstatus):
    results = _collector.results
    if not results:
        return

    counts = {k: sum(1 for r in results if r["outcome"] == k) for k in ("PASSED", "FAILED", "SKIPPED", "ERROR")}
    total = len(results)

    by_module: dict[str, dict[str, int]] = {}
    for r in results:
        bucket = by_module.setdefault(r["module"], {"total": 0, "passed": 0})
        bucket["total"] += 1
        bucket["passed"] += r["outcome"] == "PASSED"

    report_data = {
        "generated_at": datetime.now(timezone.utc).isoformat(),
        "summary": {
            "total": total,
            "passed": counts["PASSED"],
            "failed": counts["FAILED"],
            "skipped": counts["SKIPPED"],
            "errored": counts["ERROR"],
        },
        "modules": by_module,
        "test_cases": results,
    }

    json_path = os.path.join(REPORT_DIR, "robinlab_test_report.json")
    with open(json_path, "w") as fh:
        json.dump(report_data, fh, indent=2)

    width = 74
    print("\n" + "=" * width)
    print("  ROBINLAB TEST REPORT")
    print("=" * width)
    print(f"  {'Module':<28} {'Passed':>8} / {'Total'}")
    print("-" * width)
    for module, bucket in sorted(by_module.items()):
        print(f"  {module:<28} {bucket['passed']:>8} / {bucket['total']}")
    print("-" * width)
    for r in results:
        if r["outcome"] == "PASSED":
            continue
        icon = {"FAILED": "FAIL", "SKIPPED": "SKIP", "ERROR": "ERRO"}.get(r["outcome"], "????")
        name_display = r["name"] if len(r["name"]) <= 50 else r["name"][:47] + "..."
        print(f"  [{icon}]  {name_display:<50} {r['duration_s']:>6.2f}s")
    print(
        f"  Total: {total}  |  "
        f"Passed: {counts['PASSED']}  |  "
        f"Failed: {counts['FAILED']}  |  "
        f"Skipped: {counts['SKIPPED']}  |  "
        f"Errored: {counts['ERROR']}"
    )
    print("=" * width)
    print(f"  JSON report  : {json_path}")
    html_path = os.path.join(REPORT_DIR, "robinlab_test_report.html")
    if os.path.exists(html_path):
        print(f"  HTML report  : {html_path}")
    print("=" * width + "\n")
