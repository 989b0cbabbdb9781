"""Shared PASS/FAIL log for the acceptance checks, printed at session end."""

LINES = []


def verdict(number, name, ok, detail=""):
    line = f"{'PASS' if ok else 'FAIL'}  criterion {number}: {name}" + (f"  [{detail}]" if detail else "")
    LINES.append(line)
    print(line)
    return ok
