import _acceptance


def pytest_terminal_summary(terminalreporter):
    if _acceptance.LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_acceptance.LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
