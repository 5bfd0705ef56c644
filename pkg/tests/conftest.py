def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            if rep.when != "call":
                continue
            lines += [v for name, v in getattr(rep, "user_properties", []) if name == "acceptance"]
    if lines:
        terminalreporter.section("acceptance criteria")
        key = lambda s: int(s.split("criterion ")[1].split(":")[0])
        for line in sorted(lines, key=key):
            terminalreporter.write_line(line)
