"""Prints one line per acceptance criterion after the run."""


def pytest_terminal_summary(terminalreporter):
    rows = []
    for key in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(key, []):
            props = dict(getattr(rep, "user_properties", []))
            if "criterion" in props and rep.when == "call":
                rows.append((props["criterion"], "PASS" if rep.passed else "FAIL"))
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for name, status in sorted(rows):
        terminalreporter.write_line(f"{status}  {name}")
