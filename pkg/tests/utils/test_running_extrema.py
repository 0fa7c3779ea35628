import math

import pytest

from meshgcn.utils import RunningExtrema, MAX, MIN


def test_max():
    running_max = RunningExtrema(MAX)

    assert running_max.update('ValAccuracy', 0.6, epoch=0)
    assert running_max.update('ValAccuracy', 0.8, epoch=1)
    assert not running_max.update('ValAccuracy', 0.7, epoch=2)

    assert running_max.values['ValAccuracy'] == 0.8
    assert running_max.epochs['ValAccuracy'] == 1
    assert running_max.is_new_extremum('ValAccuracy', 0.9)
    assert not running_max.is_new_extremum('ValAccuracy', 0.5)


def test_min():
    running_min = RunningExtrema(MIN)

    running_min.update('ValLoss', 0.7, epoch=0)
    running_min.update('ValLoss', 0.9, epoch=1)

    assert running_min.values['ValLoss'] == 0.7
    assert running_min.epochs['ValLoss'] == 0
    assert running_min.is_new_extremum('ValLoss', 0.1)


def test_earliest_epoch_wins_ties():
    running_max = RunningExtrema(MAX)
    running_max.update('ValAccuracy', 0.75, epoch=3)

    assert not running_max.update('ValAccuracy', 0.75, epoch=7)
    assert running_max.epochs['ValAccuracy'] == 3


def test_nan_is_ignored():
    running_max = RunningExtrema(MAX)

    assert not running_max.update('ValAccuracy', math.nan, epoch=0)
    assert 'ValAccuracy' not in running_max.values

    running_max.update('ValAccuracy', 0.5, epoch=1)
    assert not running_max.update('ValAccuracy', math.nan, epoch=2)
    assert running_max.values['ValAccuracy'] == 0.5


def test_without_epoch():
    running_min = RunningExtrema(MIN)
    running_min.update('ValLoss', 1.)
    assert running_min.values == {'ValLoss': 1.}
    assert running_min.epochs == {}


def test_clear():
    running_max = RunningExtrema(MAX)
    running_max.update('A', 10, epoch=0)
    running_max.update('B', 500, epoch=0)
    running_max.clear()

    assert len(running_max.values) == 0
    assert len(running_max.epochs) == 0


def test_unknown_extremum():
    with pytest.raises(ValueError):
        RunningExtrema('median')
