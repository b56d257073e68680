"""Shared pass/fail table for the acceptance criteria."""
REPORT = {}


def report(num: int, ok: bool, detail: str = "") -> bool:
    REPORT[num] = (bool(ok), detail)
    print(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}")
    return ok
