"""Acceptance battery: one test per criterion, printing a PASS/FAIL line.

Sizes, tolerances and seeds are pinned inside :mod:`polymer2d.suite`.
Run with ``pytest -s tests/test_acceptance.py`` to see the lines live.
"""

import os

import pytest

from polymer2d import suite

_THREADS = int(os.environ.get("POLYMER2D_THREADS", "1"))


def _check(result):
    print(result.line())
    assert result.passed, result.line()


def test_criterion_01_kernel_bound():
    _check(suite.criterion_1(_THREADS))


def test_criterion_02_renewal_identity():
    _check(suite.criterion_2())


def test_criterion_03_second_moment_bounds():
    _check(suite.criterion_3())


def test_criterion_04_chaos_oracle():
    _check(suite.criterion_4())


def test_criterion_05_moment_convergence():
    _check(suite.criterion_5(_THREADS))


def test_criterion_06_erdos_taylor():
    _check(suite.criterion_6(_THREADS))


def test_criterion_07_diagram_suite():
    _check(suite.criterion_7())


def test_criterion_08_khasminskii_suite():
    _check(suite.criterion_8())


def test_criterion_09_martingale_diagnostics():
    _check(suite.criterion_9(_THREADS))


def test_criterion_10_reproducibility(tmp_path):
    _check(suite.criterion_10(str(tmp_path)))
