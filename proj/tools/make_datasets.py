#!/usr/bin/env python3
# Copyright 2026 The idbal Authors.
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Writes the two bundled datasets in sparse `label index:value` form.

breast_cancer: sklearn's Wisconsin diagnostic set, malignant = 1.
digits: sklearn's 8x8 digits, label 1 for digits >= 5.
Features are min-max scaled to [-1, 1]; zeros are omitted.
"""

import argparse
import pathlib

import numpy as np
from sklearn import datasets


def scale(x):
  lo = x.min(axis=0)
  span = x.max(axis=0) - lo
  span[span == 0] = 1.0
  return 2.0 * (x - lo) / span - 1.0


def write(path, x, y):
  with open(path, "w", newline="\n") as out:
    for row, label in zip(x, y):
      feats = " ".join(f"{j + 1}:{v:.6g}" for j, v in enumerate(row) if v != 0.0)
      out.write(f"{int(label)} {feats}".rstrip() + "\n")


def main():
  parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
  parser.add_argument("--output-dir", default="data")
  args = parser.parse_args()
  out = pathlib.Path(args.output_dir)
  out.mkdir(parents=True, exist_ok=True)

  bc = datasets.load_breast_cancer()
  write(out / "breast_cancer.txt", scale(bc.data), (bc.target == 0).astype(int))

  dg = datasets.load_digits()
  write(out / "digits.txt", scale(dg.data.astype(np.float64)), (dg.target >= 5).astype(int))


if __name__ == "__main__":
  main()
