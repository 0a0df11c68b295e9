"""Smoke-check for the command line, run outputs and manifest reruns."""

import contextlib
import io
import os
import sys
import tempfile
from dataclasses import replace
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parents[2]
SRC_DIR = REPO_ROOT / "src"
if str(SRC_DIR) not in sys.path:
    sys.path.insert(0, str(SRC_DIR))

QUIET_RUN = ["--reference-budget", "0", "--no-live", "--no-plots"]


def _assert_equal(actual, expected, label: str) -> None:
    if actual != expected:
        raise AssertionError(f"{label}: expected {expected}, got {actual}")


def _exit_code(argv: list[str]) -> int:
    from ailfem.cli import main

    stderr = io.StringIO()
    try:
        with contextlib.redirect_stderr(stderr):
            return main(argv)
    except SystemExit as exc:
        return int(exc.code or 0)


def _without_time(fields: list[str]) -> list[str]:
    from ailfem.history import CSV_COLUMNS

    index = CSV_COLUMNS.index("dt_s")
    return fields[:index] + fields[index + 1 :]


def _check_arguments() -> None:
    from ailfem.cli import main

    _assert_equal(
        _exit_code(["--scheme", "zarantonello", "--delta-z", "0.5"]), 2, "delta_z too large"
    )
    _assert_equal(_exit_code(["--scheme", "picard"]), 2, "unknown scheme")
    _assert_equal(_exit_code(["--theta", "0"]), 2, "theta = 0")
    _assert_equal(_exit_code(["--reference-budget", "500"]), 2, "small reference budget")

    stdout = io.StringIO()
    with contextlib.redirect_stdout(stdout):
        code = main(["--list-experiments"])
    _assert_equal(code, 0, "list exit code")
    lines = stdout.getvalue().splitlines()
    _assert_equal(len(lines), 3, "listed presets")
    if not all("delta_z=" in line and "lambda=" in line for line in lines):
        raise AssertionError(f"unexpected preset listing: {lines}")


def _check_run_and_rerun() -> None:
    from ailfem.history import read_history_csv
    from ailfem.storage import RunDatabase

    with tempfile.TemporaryDirectory() as temp_dir:
        first = Path(temp_dir) / "first"
        argv = ["--scheme", "kacanov", "--max-elements", "1000", "--out", str(first), *QUIET_RUN]
        _assert_equal(_exit_code(argv), 0, "run exit code")
        for name in ("history.csv", "manifest.json", "summary.txt", "results.db"):
            if not (first / name).is_file():
                raise AssertionError(f"missing output {name}")
        if list(first.glob("*.svg")):
            raise AssertionError("--no-plots must not write figures")

        history = read_history_csv(first / "history.csv")
        _assert_equal(history.last.elems > 1000, True, "final mesh beyond the budget")
        db = RunDatabase(first / "results.db")
        try:
            _assert_equal(len(db.get_history(1)), len(history), "database rows")
        finally:
            db.close()

        second = Path(temp_dir) / "second"
        argv = ["--from-manifest", str(first / "manifest.json"), "--out", str(second), *QUIET_RUN]
        _assert_equal(_exit_code(argv), 0, "rerun exit code")
        rerun = read_history_csv(second / "history.csv")
        _assert_equal(len(rerun), len(history), "rerun length")
        for a, b in zip(history, rerun, strict=True):
            if _without_time(a.csv_fields()) != _without_time(b.csv_fields()):
                raise AssertionError(f"rerun differs at step {a.step}")

        mixed = ["--from-manifest", str(first / "manifest.json"), "--preset", "2"]
        _assert_equal(_exit_code(mixed), 2, "manifest with preset")
        missing = ["--from-manifest", str(first / "absent.json"), *QUIET_RUN]
        _assert_equal(_exit_code(missing), 2, "missing manifest")

        capped = Path(temp_dir) / "capped"
        argv = [
            "--scheme",
            "zarantonello",
            "--lambda",
            "1e-9",
            "--max-inner",
            "2",
            "--out",
            str(capped),
            *QUIET_RUN,
        ]
        _assert_equal(_exit_code(argv), 1, "aborted run exit code")
        _assert_equal(len(read_history_csv(capped / "history.csv")), 3, "partial history")


def _check_manifest_options() -> None:
    from ailfem.config import ExperimentManifest
    from ailfem.history import read_history_csv

    with tempfile.TemporaryDirectory() as temp_dir:
        first = Path(temp_dir) / "first"
        argv = [
            "--scheme",
            "kacanov",
            "--max-elements",
            "600",
            "--no-newton-correction",
            "--no-reference-check",
            "--out",
            str(first),
            *QUIET_RUN,
        ]
        _assert_equal(_exit_code(argv), 0, "run exit code")
        manifest = ExperimentManifest.load(first / "manifest.json")
        _assert_equal(manifest.newton_correction, False, "recorded newton correction")
        _assert_equal(manifest.reference_budget, 0, "recorded reference budget")
        _assert_equal(manifest.reference_check, False, "recorded reference check")

        config = manifest.to_config()
        _assert_equal(config.scheme.newton_correction, False, "rebuilt newton correction")
        _assert_equal(config.reference_budget, 0, "rebuilt reference budget")
        _assert_equal(config.reference_check, False, "rebuilt reference check")

        # no option flags: everything comes from the manifest
        second = Path(temp_dir) / "second"
        argv = [
            "--from-manifest",
            str(first / "manifest.json"),
            "--out",
            str(second),
            "--no-live",
            "--no-plots",
        ]
        _assert_equal(_exit_code(argv), 0, "rerun exit code")
        replay = ExperimentManifest.load(second / "manifest.json")
        for name in ("newton_correction", "reference_budget", "reference_check"):
            _assert_equal(getattr(replay, name), getattr(manifest, name), f"replayed {name}")
        history = read_history_csv(first / "history.csv")
        rerun = read_history_csv(second / "history.csv")
        _assert_equal(len(rerun), len(history), "rerun length")
        for a, b in zip(history, rerun, strict=True):
            if _without_time(a.csv_fields()) != _without_time(b.csv_fields()):
                raise AssertionError(f"rerun differs at step {a.step}")


def _check_compare_helpers() -> None:
    from ailfem.config import AdaptiveConfig, ExperimentConfig
    from ailfem.engine import run_ailfem
    from ailfem.history import CSV_COLUMNS
    from ailfem.model import lshape_solution
    from ailfem.parallel import THREADS_ENV, build_worker_cmd, merge_histories, thread_limit
    from ailfem.schemes import SchemeSpec

    previous = os.environ.get(THREADS_ENV)
    try:
        os.environ.pop(THREADS_ENV, None)
        _assert_equal(thread_limit(), 3, "default worker limit")
        os.environ[THREADS_ENV] = "0"
        _assert_equal(thread_limit(), 1, "worker limit floor")
        os.environ[THREADS_ENV] = "many"
        try:
            thread_limit()
        except ValueError:
            pass
        else:
            raise AssertionError("non-integer worker limit must be rejected")
    finally:
        if previous is None:
            os.environ.pop(THREADS_ENV, None)
        else:
            os.environ[THREADS_ENV] = previous

    with tempfile.TemporaryDirectory() as temp_dir:
        adaptive = AdaptiveConfig(
            theta=0.5, lambda_=0.1, scheme=SchemeSpec("kacanov"), max_elements=400
        )
        config = ExperimentConfig(
            adaptive=adaptive, out_dir=Path(temp_dir), plots=False, reference_budget=0
        )
        cmd = build_worker_cmd(config, "newton", Path(temp_dir) / "newton")
        _assert_equal(cmd[cmd.index("--scheme") + 1], "newton", "worker scheme")
        _assert_equal(cmd[cmd.index("--max-elements") + 1], "400", "worker budget")
        for flag in ("--no-plots", "--no-live"):
            if flag not in cmd:
                raise AssertionError(f"worker command lacks {flag}")
        if "--no-newton-correction" in cmd:
            raise AssertionError("corrected Newton must not pass --no-newton-correction")
        plain_newton = SchemeSpec("kacanov", newton_correction=False)
        uncorrected = replace(config, adaptive=replace(adaptive, scheme=plain_newton))
        cmd = build_worker_cmd(uncorrected, "newton", Path(temp_dir) / "newton")
        if "--no-newton-correction" not in cmd:
            raise AssertionError("worker command lacks --no-newton-correction")

        history = run_ailfem(adaptive, lshape_solution())
        path = merge_histories({"kacanov": history}, Path(temp_dir) / "merged.csv")
        lines = path.read_text(encoding="utf-8").splitlines()
        _assert_equal(lines[0], ",".join(("scheme", *CSV_COLUMNS)), "merged header")
        _assert_equal(len(lines), len(history) + 1, "merged rows")


def main() -> int:
    _check_arguments()
    _check_run_and_rerun()
    _check_manifest_options()
    _check_compare_helpers()
    print("smoke_cli: OK")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
