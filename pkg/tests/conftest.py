import pytest

ACCEPTANCE = {}


@pytest.fixture
def accept():
    """Record one acceptance line: ``accept(number, title, ok, detail)`` then assert."""

    def record(number, title, ok, detail=""):
        ACCEPTANCE[number] = (title, bool(ok), detail)
        print(f"\n[criterion {number:2d}] {'PASS' if ok else 'FAIL'}  {title}  ({detail})")
        assert ok, f"criterion {number} failed: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"{number:2d}. {'PASS' if ok else 'FAIL'}  {title}  ({detail})")
    passed = sum(ok for _, ok, _ in ACCEPTANCE.values())
    terminalreporter.write_line(f"{passed}/{len(ACCEPTANCE)} criteria passed")
