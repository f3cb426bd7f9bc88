"""Shared pytest plumbing: the acceptance-criteria summary block."""

ACCEPTANCE_LINES = []


def record_acceptance(name, ok, detail):
    """One verdict line per criterion, echoed in the terminal summary."""
    line = "ACCEPTANCE %-22s %s  (%s)" % (name, "PASS" if ok else "FAIL",
                                          detail)
    print(line)
    ACCEPTANCE_LINES.append(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
