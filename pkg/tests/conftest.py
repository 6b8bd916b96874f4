"""Prints a one-line PASS/FAIL verdict per acceptance criterion after a run
that includes tests/test_acceptance.py.  Each criterion is one test class
there; a criterion passes only if every test of its class passed."""

from collections import defaultdict

# class name in test_acceptance.py -> human-readable criterion label
ACCEPTANCE_CRITERIA = [
    ("TestDeterministicGridGuarantee", "deterministic per-segment grid guarantee"),
    ("TestRandomizedPipelineGuarantee", "randomized segment-pipeline guarantee"),
    ("TestStructuralBounds", "structural cost-share and monotonicity bounds"),
    ("TestClosedFormOracleAgreement", "closed-form loss vs numerical oracles"),
    ("TestConvexBodyPipeline", "convex-body sampling pipeline"),
    ("TestEndToEndSolveQuality", "end-to-end solve quality on coarse grids"),
    ("TestGridStageLinearity", "grid-stage runtime linearity"),
    ("TestTrackingAccuracyThroughput", "tracking accuracy and throughput"),
    ("TestLargeInputScaling", "large-input size reduction"),
]

_outcomes: dict[str, list] = defaultdict(list)


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance.py" not in report.nodeid:
        return
    for cls, _ in ACCEPTANCE_CRITERIA:
        if f"::{cls}::" in report.nodeid:
            _outcomes[cls].append(report.outcome)
            break


def pytest_terminal_summary(terminalreporter):
    seen = [(cls, label) for cls, label in ACCEPTANCE_CRITERIA if _outcomes.get(cls)]
    if not seen:
        return
    terminalreporter.section("acceptance criteria")
    for cls, label in seen:
        runs = _outcomes[cls]
        ok = all(o == "passed" for o in runs)
        terminalreporter.write_line(
            f"{'PASS' if ok else 'FAIL'}  {label} "
            f"({sum(o == 'passed' for o in runs)}/{len(runs)} tests)"
        )
