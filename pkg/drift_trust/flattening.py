"""Flatten nested report rows into CSV columns"""
import collections
import itertools
import json
import re

from typing import Dict, List

import inflection

MAX_KEY_LENGTH = 255


def flatten_key(k, parent_key, sep):
    """
    Snake-cased column name of a nested key

    Params:
        k: key at the current level
        parent_key: keys of the enclosing levels
        sep: separator between levels

    Returns:
        column name, shortened level by level while longer than MAX_KEY_LENGTH
    """
    full_key = [inflection.underscore(part) for part in parent_key + [k]]
    reducer_index = 0
    while len(sep.join(full_key)) >= MAX_KEY_LENGTH and reducer_index < len(full_key):
        reduced_key = re.sub(r'[a-z_]', '', inflection.camelize(full_key[reducer_index]))
        full_key[reducer_index] = \
            (reduced_key if len(reduced_key) > 1 else full_key[reducer_index][0:3]).lower()
        reducer_index += 1

    return sep.join(full_key)


# pylint: disable=invalid-name
def flatten_record(d, parent_key=None, sep='__', level=0, max_level=0):
    """
    Flatten nested dicts into one level

    Params:
        d: record to flatten
        parent_key: keys of the enclosing levels
        sep: separator between levels
        max_level: nesting depth to flatten; deeper dicts and all lists are JSON-dumped

    Returns:
        flat dict
    """
    if parent_key is None:
        parent_key = []

    items = []
    for k, v in d.items():
        new_key = flatten_key(str(k), parent_key, sep)
        if isinstance(v, collections.abc.Mapping) and level < max_level:
            items.extend(flatten_record(v, parent_key + [str(k)], sep=sep, level=level + 1,
                                        max_level=max_level).items())
        else:
            items.append((new_key, json.dumps(v) if isinstance(v, (dict, list, tuple)) else v))

    key_func = lambda item: item[0]
    for k, g in itertools.groupby(sorted(items, key=key_func), key=key_func):
        if len(list(g)) > 1:
            raise ValueError(f'Duplicate column name produced in record: {k}')

    return dict(items)


def flatten_rows(rows: List[Dict], max_level: int = 0) -> List[Dict]:
    """Flatten every row; columns keep first-seen order"""
    return [flatten_record(row, max_level=max_level) for row in rows]
