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
import itertools
import math
import os
from pathlib import Path

import pytest

import tempdrift

DATA = Path(os.environ.get("TEMPDRIFT_TEST_DATA_DIR", Path(__file__).resolve().parents[2] / "tests" / "data"))


def enumerate_p(diffs):
    nz = [d for d in diffs if d != 0]
    if not nz:
        return 1.0
    mags = [abs(d) for d in nz]
    ranks = [sum(m < x for m in mags) + (sum(m == x for m in mags) + 1) / 2 for x in mags]
    w_plus = sum(r for r, d in zip(ranks, nz) if d > 0)
    w_minus = sum(ranks) - w_plus
    t = min(w_plus, w_minus)
    hits = sum(
        1 for signs in itertools.product((0, 1), repeat=len(nz)) if sum(r for r, s in zip(ranks, signs) if s) <= t + 1e-9
    )
    return min(1.0, 2 * hits / 2 ** len(nz))


def test_reference_grids_summarize():
    glove = tempdrift.summarize_csv(DATA / "ref_glove.csv")
    assert glove["row"] == "55.2  54.1  63.0  -1.3  4.1*  -0.1  2.1*"
    roberta = tempdrift.summarize_csv(DATA / "ref_roberta.csv")
    assert roberta["row"] == "67.5  77.8  80.0  3.2  1.4*  3.5  0.8"
    assert len(glove["scores"]["AS_anchor"]["diffs"]) == 10


def test_wilcoxon_matches_enumeration():
    for diffs in ([1, -2, 3, 4, 0, 5], [0.5, 0.5, -0.25, 1], [2, 2, 2], [0, 0]):
        res = tempdrift.wilcoxon(diffs)
        assert math.isclose(res["p_value"], enumerate_p(diffs), abs_tol=1e-12)
    assert tempdrift.wilcoxon([0, 0])["degenerate"]
    with pytest.raises(tempdrift.UsageError):
        tempdrift.wilcoxon([1, 2], zero_method="zsplit")


def test_summarize_matrix_small():
    res = tempdrift.summarize_matrix([[0.10], [0.20, 0.40]])
    assert math.isclose(res["scores"]["DS_consecutive"]["value"], 0.10)
    with pytest.raises(tempdrift.DataError):
        tempdrift.summarize_matrix([[0.5]])


def test_metrics():
    assert tempdrift.span_micro_f1([["B-PER", "I-PER", "O"]], [["B-PER", "I-PER", "O"]]) == 1.0
    assert tempdrift.span_micro_f1([["O"]], [["O"]]) == 1.0
    assert tempdrift.class_f1(["a", "b", "a"], ["a", "a", "b"], "a") == 0.5
    assert tempdrift.macro_f1(["a", "b"], ["a", "b"], ["a", "b", "c"]) == 1.0


def test_simulate_and_run_grid(tmp_path):
    corpus = tmp_path / "corpus.jsonl"
    count = tempdrift.simulate(
        corpus, {"periods": "4", "records_per_period": "100", "vocab_size": "600", "indicative_size": "15"}
    )
    assert count == 400
    summary = tempdrift.run_grid(corpus, "macro-f1", tmp_path / "out", seeds=[1])
    assert summary["n"] == 4
    assert (tmp_path / "out" / "grid.csv").exists()
    again = tempdrift.summarize_csv(tmp_path / "out" / "grid.csv")
    assert again["row"] == summary["row"]
    with pytest.raises(tempdrift.UsageError):
        tempdrift.simulate(tmp_path / "x.jsonl", {"churn": "2"})
