#!/usr/bin/env python3
# Copyright 2026 The ICU-Sepsis Engine Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Converts the published icu-sepsis package assets into a CSV bundle.

Usage:
  pip download icu-sepsis==2.0.1 --no-deps -d /tmp/wheel
  python3 scripts/convert_official_bundle.py /tmp/wheel/icu_sepsis-2.0.1-py3-none-any.whl data/icu-sepsis

Writes transitions/centroids/expert policy gzip-compressed; the engine reads
`.csv.gz` transparently.
"""

import gzip
import io
import sys
import zipfile
from pathlib import Path

import numpy as np

ASSETS = 'icu_sepsis/envs/assets/'


def fmt(x: float) -> str:
    return '0' if x == 0.0 else repr(float(x))


def write_table(path: Path, rows) -> None:
    opener = gzip.open if path.suffix == '.gz' else open
    with opener(path, 'wt', newline='\n') as f:
        for row in rows:
            f.write(','.join(fmt(x) for x in row))
            f.write('\n')


def main(wheel: str, out_dir: str) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with zipfile.ZipFile(wheel) as z:
        dyn = np.load(io.BytesIO(z.read(ASSETS + 'dynamics.npz')))
        admissible = z.read(ASSETS + 'admissible_actions.txt')
        license_text = z.read('icu_sepsis-2.0.1.dist-info/licenses/LICENSE.txt')

    tx = dyn['tx_mat']
    n_states, n_actions, _ = tx.shape
    r_mat = dyn['r_mat']
    # Reward depends only on the destination state in the published tensor.
    reward = r_mat.max(axis=(0, 1))
    assert np.count_nonzero(reward) == 1, 'expected a single rewarding state'

    write_table(out / 'transitions.csv.gz', tx.reshape(n_states * n_actions,
                                                       n_states))
    write_table(out / 'rewards.csv', [reward])
    write_table(out / 'initial_dist.csv', [dyn['d_0']])
    write_table(out / 'centroids.csv.gz', dyn['state_cluster_centers'])
    write_table(out / 'expert_policy.csv.gz', dyn['expert_policy'])
    (out / 'admissible_actions.txt').write_bytes(admissible)
    (out / 'LICENSE').write_bytes(license_text)


if __name__ == '__main__':
    if len(sys.argv) != 3:
        sys.exit(__doc__)
    main(sys.argv[1], sys.argv[2])
