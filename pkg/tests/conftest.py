"""Print the acceptance-gate lines in the terminal summary."""


def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            if getattr(rep, "when", None) == "call" and "test_acceptance" in rep.nodeid:
                lines += [ln for ln in (rep.capstdout or "").splitlines() if ln.startswith("CRITERION")]
    if lines:
        terminalreporter.section("acceptance gate")
        for ln in sorted(lines):
            terminalreporter.write_line(ln)
