import json

import numpy as np
import pytest

from sist.dataset import ValidatedDataset, stratified_kfold
from sist.errors import CorruptModel, LengthMismatch, SchemaVersionMismatch, UnknownClass
from sist.pipeline import (
    SCHEMA,
    TABLE1,
    TABLE2,
    AblationReport,
    EvalReport,
    GridResult,
    HyperGrid,
    Hyperparams,
    ablation_report,
    evaluate,
    grid_search_cv,
    load_model,
    save_model,
    train_sist,
)
from sist.classifier import predict
from sist.transform import shapelet_transform

from conftest import planted, random_walks


@pytest.fixture(scope="module")
def planted_model():
    return train_sist(planted(seed=0), Hyperparams(L=3, left=2, right=2, N=5))


def test_planted_perfect(planted_model):
    rep = evaluate(planted_model, planted(seed=1))
    assert rep.accuracy == 1.0
    assert rep.n_test == 40
    assert rep.confusion == ((20, 0), (0, 20))
    assert planted_model.train_accuracy == 1.0


def test_stored_train_accuracy_consistent():
    d = random_walks(30, 25, seed=4)
    model = train_sist(d, Hyperparams(N=7))
    assert evaluate(model, d).accuracy == model.train_accuracy


def test_model_fields(planted_model):
    m = planted_model
    assert m.series_length == 30
    assert m.candidates == 40 * 28
    assert len(m.basis) == 5 and m.basis.dist is None
    assert set(m.stage_times) == {"extract", "score", "select", "transform", "train", "total"}
    assert m.provenance["builder"].startswith("sist ")
    assert m.classes == ("a", "b")


def test_n_above_survivors():
    d = planted(n=10, m=8)
    model = train_sist(d, Hyperparams(L=3, N=2000, delete_overlap=True))
    assert 1 <= len(model.basis) <= 2  # at most m // L disjoint intervals
    assert model.linear.dim == len(model.basis)


def test_evaluate_errors(planted_model):
    other = ValidatedDataset(np.zeros((2, 30)), ("a", "zzz"), classes=("a", "zzz"))
    with pytest.raises(UnknownClass):
        evaluate(planted_model, other)
    with pytest.raises(LengthMismatch):
        evaluate(planted_model, planted(m=29))


def test_eval_report_formats(planted_model):
    rep = evaluate(planted_model, planted(seed=1))
    d = json.loads(rep.to_json())
    assert d["confusion"] == [[20, 0], [0, 20]]
    assert d["classes"] == ["a", "b"]
    row = rep.to_csv_row().split(",")
    assert len(row) == len(EvalReport.CSV_HEADER.split(","))
    assert row[:8] == ["1.0", "40", "a", "b", "20", "0", "0", "20"]


def test_hyperparams_validation():
    with pytest.raises(ValueError):
        Hyperparams(L=0)
    with pytest.raises(ValueError):
        Hyperparams(left=-1)
    with pytest.raises(ValueError):
        Hyperparams(N=0)
    hp = Hyperparams(True, 4, 1, 2, 30, relax_mode="dp", overlap_scope="same")
    assert Hyperparams.from_dict(hp.to_dict()) == hp


def test_tables():
    assert len(TABLE1) == 160
    assert len(TABLE1.cells()) == len(set(TABLE1.cells()))
    assert len(TABLE2) == 17
    assert TABLE2["Coffee"] == Hyperparams(True, 3, 3, 3, 10)
    assert TABLE2["ItalyPowerDemand"] == Hyperparams(False, 3, 4, 4, 100)


# persistence


def test_save_load_roundtrip(planted_model):
    blob = save_model(planted_model, timestamps=False)
    again = load_model(blob)
    assert save_model(again, timestamps=False) == blob
    X = planted(seed=3).series
    np.testing.assert_array_equal(
        predict(planted_model.linear, shapelet_transform(X, planted_model.basis)),
        predict(again.linear, shapelet_transform(X, again.basis)),
    )
    assert again.hyperparams == planted_model.hyperparams
    assert json.loads(blob)["schema"] == SCHEMA


def test_save_deterministic_without_timestamps():
    d = random_walks(20, 20, seed=2)
    a = save_model(train_sist(d, Hyperparams(N=4)), timestamps=False)
    b = save_model(train_sist(d, Hyperparams(N=4)), timestamps=False)
    assert a == b


def test_load_truncated(planted_model):
    blob = save_model(planted_model)
    with pytest.raises(CorruptModel):
        load_model(blob[: len(blob) // 2])
    with pytest.raises(CorruptModel):
        load_model(b"[]")


def test_load_wrong_schema(planted_model):
    doc = json.loads(save_model(planted_model))
    doc["schema"] = "sist-model/2"
    with pytest.raises(SchemaVersionMismatch):
        load_model(json.dumps(doc))


def test_load_missing_field(planted_model):
    doc = json.loads(save_model(planted_model))
    del doc["linear"]
    with pytest.raises(CorruptModel):
        load_model(json.dumps(doc))


# grid search


def _scratch_cv(d, hp, k, seed):
    """Reference CV: train each fold from scratch with the public pipeline."""
    accs = []
    for tr, te in stratified_kfold(d, k, seed):
        model = train_sist(d.subset(tr), hp)
        accs.append(evaluate(model, d.subset(te)).accuracy)
    return accs


def test_grid_single_cell():
    d = random_walks(20, 20, seed=5)
    hp = Hyperparams(L=3, left=1, right=1, N=4)
    res = grid_search_cv(d, [hp], k=4, seed=1)
    assert res.best == hp
    assert list(res.table[0].fold_accuracies) == _scratch_cv(d, hp, 4, 1)


def test_grid_matches_scratch_training():
    d = planted(n=24, m=20, height=0.8, noise=0.5, seed=7)
    grid = HyperGrid(delete_overlap=(True, False), L=(3, 4), left=(0, 2), right=(1,), N=(2, 5, 30))
    res = grid_search_cv(d, grid, k=3, seed=0)
    for row in res.table:
        assert list(row.fold_accuracies) == _scratch_cv(d, row.hp, 3, 0), row.hp


def test_grid_best_dominates_and_ties():
    d = random_walks(24, 20, seed=9)
    res = grid_search_cv(d, HyperGrid(L=(3,), left=(1, 2), right=(1,), N=(3, 6)), k=3)
    top = max(r.mean_accuracy for r in res.table)
    best_row = next(r for r in res.table if r.hp == res.best)
    assert best_row.mean_accuracy == top
    tied = [r.hp for r in res.table if r.mean_accuracy == top]
    assert res.best.N == min(h.N for h in tied)


def test_grid_full_table1():
    d = random_walks(60, 40, seed=11)
    res = grid_search_cv(d, TABLE1, k=10, seed=42)
    assert len(res.table) == 160
    lines = res.to_csv().splitlines()
    assert lines[0] == GridResult.CSV_HEADER
    assert len(lines) == 161
    assert all(len(r.fold_accuracies) == 10 for r in res.table)


def test_grid_order_invariant(rng):
    d = random_walks(20, 20, seed=13)
    cells = HyperGrid(L=(3,), left=(1, 3), right=(0, 2), N=(2, 10)).cells()
    a = grid_search_cv(d, cells, k=4)
    shuffled = [cells[i] for i in rng.permutation(len(cells))]
    b = grid_search_cv(d, shuffled, k=4)
    assert a.best == b.best
    assert a.to_csv() == b.to_csv()


def test_grid_empty():
    with pytest.raises(ValueError):
        grid_search_cv(random_walks(10, 10), [], k=2)


# ablation


def test_ablation_stage_sums():
    d = random_walks(20, 30, seed=6)
    rep = ablation_report(d, None, Hyperparams(N=5))
    assert isinstance(rep, AblationReport)
    for part, total in ((rep.sist_shapelet_s + rep.sist_classifier_s, rep.sist_total_s),
                        (rep.oracle_shapelet_s + rep.oracle_classifier_s, rep.oracle_total_s)):
        assert part <= total * 1.0001
        assert part >= 0.95 * total
    p = rep.proportions()
    assert abs(p["sist_shapelet"] + p["sist_classifier"] - 1.0) <= 0.05
    assert len(rep.to_csv_row().split(",")) == 6
