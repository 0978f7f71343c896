#!/usr/bin/env python3
"""
Utility script to compare a table1 report against the published cell means.

Usage:
    python scripts/compare_table1.py --report results/table1/report.csv
    python scripts/compare_table1.py --report results/table1/report.csv --tol 0.15
"""

import argparse
import sys
from pathlib import Path

from gselect.lab.reports import (
    compare_with_reference,
    load_reference,
    ordering_violations,
    read_report,
)

DEFAULT_REFERENCE = Path(__file__).resolve().parent.parent / "configs" / "table1_reference.yaml"


def compare(report_path: Path, reference_path: Path, tol: float, slack: float) -> bool:
    """
    Print the per-cell comparison and any ordering violations.

    Args:
        report_path: report.csv written by `gselect table1`
        reference_path: YAML file of published means
        tol: Allowed absolute difference between a mean and its reference
        slack: Allowed shortfall in the prior ordering

    Returns:
        True if every matched cell is within tol and the ordering holds
    """
    report = read_report(report_path)
    merged = compare_with_reference(report, load_reference(reference_path), tol=tol)
    if merged.empty:
        print(f"Error: no cells of {report_path} match the reference")
        return False

    print(merged.to_string(index=False))
    off = merged[~merged["within_tol"]]
    print(f"\n{len(merged) - len(off)}/{len(merged)} cells within {tol}")

    violations = ordering_violations(report, slack=slack)
    if not violations.empty:
        print("\nOrdering violations:")
        print(violations.to_string(index=False))
    return off.empty and violations.empty


def main():
    parser = argparse.ArgumentParser(description='Compare a table1 report with published means')
    parser.add_argument('--report', type=Path, required=True, help='report.csv to check')
    parser.add_argument('--reference', type=Path, default=DEFAULT_REFERENCE, help='Reference means YAML')
    parser.add_argument('--tol', type=float, default=0.10, help='Absolute tolerance on cell means')
    parser.add_argument('--slack', type=float, default=0.05, help='Slack on the prior ordering')

    args = parser.parse_args()

    if not args.report.exists():
        print(f"Error: Report not found: {args.report}")
        sys.exit(2)

    ok = compare(args.report, args.reference, args.tol, args.slack)
    sys.exit(0 if ok else 1)


if __name__ == '__main__':
    main()
