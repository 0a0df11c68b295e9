"""Run every quick smoke check in its own process; the acceptance run is left out."""

import subprocess
import sys
import time
from pathlib import Path

SMOKE_DIR = Path(__file__).resolve().parent

SCRIPTS = (
    "smoke_mesh.py",
    "smoke_linalg.py",
    "smoke_model.py",
    "smoke_fem.py",
    "smoke_estimator.py",
    "smoke_schemes.py",
    "smoke_reference.py",
    "smoke_driver.py",
    "smoke_cli.py",
)


def main() -> int:
    failures = []
    for script in SCRIPTS:
        start = time.monotonic()
        completed = subprocess.run([sys.executable, str(SMOKE_DIR / script)], check=False)
        elapsed = time.monotonic() - start
        if completed.returncode != 0:
            print(f"{script}: FAILED with exit code {completed.returncode} ({elapsed:.1f}s)")
            failures.append(script)
        else:
            print(f"  {script} ({elapsed:.1f}s)")
    if failures:
        print(f"{len(failures)} of {len(SCRIPTS)} smoke checks failed: {', '.join(failures)}")
        return 1
    print(f"all {len(SCRIPTS)} smoke checks passed")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
