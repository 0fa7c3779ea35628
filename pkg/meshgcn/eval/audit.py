import logging
from typing import Set

import numpy as np
import pandas as pd
from tqdm import tqdm

from ..config import SplitSpec
from ..data import split_table, expected_set_sizes, SETS


def subject_overlap(
    df_train: pd.DataFrame,
    df_val: pd.DataFrame,
    df_test: pd.DataFrame,
    subject_key: str = 'subject_id',
) -> Set[str]:
    """Returns the subjects that occur in more than one subset."""
    train = set(df_train[subject_key])
    val = set(df_val[subject_key])
    test = set(df_test[subject_key])
    return (train & val) | (train & test) | (val & test)


def audit_splits(
    df: pd.DataFrame,
    spec: SplitSpec,
    subject_key: str = 'subject_id',
    label_key: str = 'label',
) -> pd.DataFrame:
    """Checks the subject-level splits of every Monte Carlo trial.

    For every trial, the audit checks that no subject is in two sets, that
    every class has the expected number of test and validation subjects, and
    that the scan-level label proportion of each set is within
    ``spec.label_tolerance`` of the global proportion.

    Args:
        df: The scans, with a subject and a label column.
        spec: The split protocol.
        subject_key: The column with the subject of each scan.
        label_key: The column with the label of each scan.

    Returns:
        A DataFrame with one row per trial.
    """
    global_prop = df[label_key].mean()
    rows = []
    for trial in tqdm(range(spec.n_trials), leave=False, desc='Audit'):
        table = split_table(df, spec, trial, subject_key=subject_key,
                            label_key=label_key)
        sets = df[subject_key].map(dict(zip(table['subject_id'],
                                            table['set'])))

        n_overlap = len(subject_overlap(
            *[df[sets == name] for name in SETS], subject_key=subject_key
        ))

        sizes_ok = True
        for label, group in table.groupby('label'):
            n_test, n_val = expected_set_sizes(len(group), spec, label)
            sizes_ok &= (group['set'] == 'test').sum() == n_test
            sizes_ok &= (group['set'] == 'val').sum() == n_val

        row = {'trial': trial, 'overlap': n_overlap}
        max_dev = 0.
        for name in SETS:
            in_set = table['set'] == name
            row[f'n_subjects_{name}'] = int(in_set.sum())
            row[f'n_scans_{name}'] = int((sets == name).sum())
            dev = abs(df.loc[sets == name, label_key].mean() - global_prop)
            row[f'label_dev_{name}'] = dev
            max_dev = max(max_dev, dev)

        n_subjects = len(table)
        row['test_fraction'] = row['n_subjects_test'] / n_subjects
        row['val_fraction_of_remaining'] = (
            row['n_subjects_val']
            / (n_subjects - row['n_subjects_test'])
        )
        row['sizes_ok'] = bool(sizes_ok)
        row['labels_ok'] = bool(max_dev <= spec.label_tolerance + 1e-12)
        row['passed'] = n_overlap == 0 and row['sizes_ok'] \
            and row['labels_ok']
        rows.append(row)

    audit = pd.DataFrame(rows)
    logging.info(
        f'Split audit: {int(audit["passed"].sum())} of {len(audit)} trials '
        f'passed, total subject overlap {int(audit["overlap"].sum())}, '
        f'mean test fraction {np.mean(audit["test_fraction"]):.3f}'
    )
    return audit
