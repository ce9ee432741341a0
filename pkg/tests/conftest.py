"""Shared fixtures: the small closed-form models used across the suite.

All four are 1x1 so every expected value is checkable by hand:

* ``m0``       {0.5, 1, 1, 1}     strictly passive, certificate set [0.5, 2]
* ``m1``       {0.5, 1, 0.5, 1}   strictly passive, X_min = (2 - sqrt 3)/2
* ``m_flat``   {0, 0, 0, 1}       static unit gain, margin sup = 1
* ``m_neg``    {0.5, 1, 1, -0.2}  stable but not passive
"""

import numpy as np
import pytest

from passirad import StateSpaceModel


@pytest.fixture
def m0() -> StateSpaceModel:
    return StateSpaceModel([[0.5]], [[1.0]], [[1.0]], [[1.0]])


@pytest.fixture
def m1() -> StateSpaceModel:
    return StateSpaceModel([[0.5]], [[1.0]], [[0.5]], [[1.0]])


@pytest.fixture
def m_flat() -> StateSpaceModel:
    return StateSpaceModel(
        np.zeros((1, 1)), np.zeros((1, 1)), np.zeros((1, 1)), np.eye(1)
    )


@pytest.fixture
def m_neg() -> StateSpaceModel:
    return StateSpaceModel([[0.5]], [[1.0]], [[1.0]], [[-0.2]])
