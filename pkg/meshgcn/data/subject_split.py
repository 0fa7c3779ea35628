import logging
import warnings
from typing import Tuple

import numpy as np
import pandas as pd

from ..config import SplitSpec


SETS = ['train', 'val', 'test']


def split_table(
    df: pd.DataFrame,
    spec: SplitSpec,
    trial: int = 0,
    subject_key: str = 'subject_id',
    label_key: str = 'label',
) -> pd.DataFrame:
    """Assigns every subject to the training, validation or test set.

    The subjects of each class are shuffled with random seed
    ``spec.seed + trial``. A fraction ``spec.test_fraction`` of them goes to
    the test set and a fraction ``spec.val_fraction_of_remaining`` of the
    others to the validation set (rounded half up, at least one subject per
    class and set). Because subjects carry several scans, the label
    proportions of the scans in each set can still drift from the global
    proportion. A draw is repeated until every set is within
    ``spec.label_tolerance`` of it, for at most ``spec.max_retries`` draws;
    after that, the best draw is kept with a warning.

    Args:
        df: The scans, with a subject and a label column.
        spec: The split protocol.
        trial: The index of the Monte Carlo trial.
        subject_key: The column with the subject of each scan.
        label_key: The column with the label of each scan.

    Returns:
        A DataFrame with one row per subject and the columns ``subject_id``,
        ``label``, ``n_scans`` and ``set``.
    """
    labels_per_subject = df.groupby(subject_key)[label_key].nunique()
    changing = labels_per_subject[labels_per_subject > 1]
    if len(changing) > 0:
        raise ValueError(
            f'{len(changing)} subjects have scans with different labels, '
            f'e.g. {changing.index[0]}'
        )

    subjects = (
        df.groupby(subject_key)
        .agg(label=(label_key, 'first'), n_scans=(label_key, 'size'))
        .reset_index()
        .rename(columns={subject_key: 'subject_id'})
        .sort_values('subject_id', kind='mergesort')
        .reset_index(drop=True)
    )

    counts = {
        label: expected_set_sizes(len(group), spec, label)
        for label, group in subjects.groupby('label')
    }

    rng = np.random.RandomState(spec.seed + trial)
    global_prop = np.average(subjects['label'], weights=subjects['n_scans'])

    best, best_dev = None, np.inf
    for attempt in range(spec.max_retries):
        assigned = subjects.copy()
        assigned['set'] = 'train'
        for label, group in subjects.groupby('label'):
            n_test, n_val = counts[label]
            idxs = group.index.values.copy()
            rng.shuffle(idxs)
            assigned.loc[idxs[:n_test], 'set'] = 'test'
            assigned.loc[idxs[n_test:n_test + n_val], 'set'] = 'val'

        dev = _max_label_deviation(assigned, global_prop)
        if dev < best_dev:
            best, best_dev = assigned, dev
        if dev <= spec.label_tolerance:
            break
        logging.debug(
            f'Trial {trial}, draw {attempt}: label proportions deviate '
            f'{dev:.3f} from the global proportion, drawing again'
        )
    else:
        warnings.warn(
            f'No split within the label tolerance {spec.label_tolerance} '
            f'after {spec.max_retries} draws. Using the best draw '
            f'(deviation {best_dev:.3f}). See debug log for more info.'
        )

    return best


def subject_level_split(
    df: pd.DataFrame,
    spec: SplitSpec,
    trial: int = 0,
    subject_key: str = 'subject_id',
    label_key: str = 'label',
) -> Tuple[pd.DataFrame, pd.DataFrame, pd.DataFrame]:
    """Splits the scans in a training, validation and test subset, such that
    all scans of a subject end up in the same subset.

    See :func:`split_table` for how the subjects are assigned.

    Returns:
        A tuple with the training, validation and test DataFrame.
    """
    table = split_table(df, spec, trial, subject_key=subject_key,
                        label_key=label_key)
    set_of = dict(zip(table['subject_id'], table['set']))
    sets = df[subject_key].map(set_of)
    return tuple(
        df[sets == name].reset_index(drop=True).copy()
        for name in SETS
    )


def expected_set_sizes(
    n_subjects: int,
    spec: SplitSpec,
    label: int = 0,
) -> Tuple[int, int]:
    """Returns the number of test and validation subjects of a class with
    ``n_subjects`` subjects."""
    n_test = max(1, _round_half_up(spec.test_fraction * n_subjects))
    n_val = max(1, _round_half_up(
        spec.val_fraction_of_remaining * (n_subjects - n_test)
    ))
    if n_subjects - n_test - n_val < 1:
        raise ValueError(
            f'Class {label} has {n_subjects} subjects, too few to populate '
            'a training, validation and test set'
        )
    return n_test, n_val


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def _max_label_deviation(assigned: pd.DataFrame, global_prop: float) -> float:
    devs = []
    for _, group in assigned.groupby('set'):
        prop = np.average(group['label'], weights=group['n_scans'])
        devs.append(abs(prop - global_prop))
    return max(devs)
