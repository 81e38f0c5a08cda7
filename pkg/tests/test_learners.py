import numpy as np
import pytest
from sklearn.base import clone
from sklearn.utils.estimator_checks import check_get_params_invariance

from effortrank.dataset import Dataset
from effortrank.learners import (
    LEARNER_TAGS, DecisionTree, KNeighbors, LearnerSpec, LogisticRegression, NaiveBayes,
    RandomForest, RUSBoost, UnderBagging, grow_tree, learner_from_tag, load_external_probabilities,
    make_under_bag_sample, predict_label, predict_proba, stratified_bootstrap, train,
    under_sample_indices,
)
from effortrank.learners.base import binary_target
from effortrank.learners.tree import _node_cost


def _data(n=120, d=4, seed=0, rate=0.3):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d))
    logit = 1.5 * X[:, 0] - X[:, 1] + rng.normal(scale=0.5, size=n)
    y = logit > np.quantile(logit, 1 - rate)
    return Dataset("toy", tuple(f"f{i}" for i in range(d)), X, np.exp(X[:, 2]) * 10 + 1, y)


ALL_ESTIMATORS = [
    LogisticRegression(),
    NaiveBayes(),
    KNeighbors(k=5),
    DecisionTree(),
    DecisionTree(criterion="gini", max_depth=3),
    RandomForest(n_estimators=15, random_state=1),
    UnderBagging(DecisionTree(), n_estimators=5, random_state=1),
    RUSBoost(DecisionTree(max_depth=2), n_estimators=5, random_state=1),
]


@pytest.mark.parametrize("est", ALL_ESTIMATORS, ids=lambda e: type(e).__name__)
def test_estimator_contract(est):
    d = _data()
    y = d.defective.astype(int)
    fitted = clone(est).fit(d.X, y)
    proba = fitted.predict_proba(d.X)
    assert proba.shape == (len(d), 2)
    assert np.all((proba >= 0) & (proba <= 1))
    np.testing.assert_allclose(proba.sum(axis=1), 1.0)
    np.testing.assert_array_equal(fitted.classes_, [0, 1])
    assert set(np.unique(fitted.predict(d.X))) <= {0, 1}
    check_get_params_invariance(type(est).__name__, est)
    # training-set fit beats chance for every learner
    from sklearn.metrics import roc_auc_score
    assert roc_auc_score(y, proba[:, 1]) > 0.7


@pytest.mark.parametrize("est", ALL_ESTIMATORS, ids=lambda e: type(e).__name__)
def test_single_class_is_an_error(est):
    X = np.arange(10.0).reshape(-1, 1)
    with pytest.raises(ValueError, match="class"):
        clone(est).fit(X, np.zeros(10, dtype=int))


def test_binary_target_rejects_single_class():
    with pytest.raises(ValueError):
        binary_target([1, 1, 1])


def test_knn_exact_training_point():
    d = _data(40)
    m = KNeighbors(k=1).fit(d.X, d.defective.astype(int))
    np.testing.assert_array_equal(m.predict_proba(d.X)[:, 1], d.defective.astype(float))


def test_knn_k_larger_than_data():
    d = _data(10)
    with pytest.raises(ValueError):
        KNeighbors(k=11).fit(d.X, d.defective.astype(int))
    with pytest.raises(ValueError):
        train(LearnerSpec("KNN", {"k": 11}), d)


def test_knn_brute_force():
    d = _data(50, seed=4)
    m = KNeighbors(k=7).fit(d.X, d.defective.astype(int))
    q = np.random.default_rng(9).normal(size=(8, d.n_features))
    Zq = (q - m.mean_) / m.scale_
    Zt = (d.X - m.mean_) / m.scale_
    for i in range(len(q)):
        dist = ((Zt - Zq[i]) ** 2).sum(axis=1)
        nn = np.argsort(dist, kind="stable")[:7]
        assert m.predict_proba(q[i:i + 1])[0, 1] == pytest.approx(d.defective[nn].mean())


def test_logistic_monotone_on_separable_data():
    X = np.r_[-np.ones(20), np.ones(20)].reshape(-1, 1)
    y = np.r_[np.zeros(20), np.ones(20)].astype(int)
    m = LogisticRegression().fit(X, y)
    grid = np.linspace(-2, 2, 41).reshape(-1, 1)
    p = m.predict_proba(grid)[:, 1]
    assert np.all(np.diff(p) > 0)
    assert m.predict_proba([[1.0]])[0, 1] > 0.5


def test_logistic_close_to_sklearn():
    from sklearn.linear_model import LogisticRegression as SkLR
    d = _data(300, seed=2)
    y = d.defective.astype(int)
    ours = LogisticRegression(max_iter=5000, learning_rate=0.5, l2=0.0).fit(d.X, y)
    Z = (d.X - ours.mean_) / ours.scale_
    ref = SkLR(C=1e6, max_iter=5000).fit(Z, y)
    np.testing.assert_allclose(ours.predict_proba(d.X)[:, 1], ref.predict_proba(Z)[:, 1], atol=0.02)


def test_naive_bayes_symmetric_case():
    X = np.array([[0.0], [1.0], [2.0], [0.0], [1.0], [2.0]])
    y = np.array([0, 0, 0, 1, 1, 1])
    m = NaiveBayes().fit(X, y)
    np.testing.assert_allclose(m.predict_proba(np.linspace(-3, 3, 7).reshape(-1, 1))[:, 1], 0.5)


def test_naive_bayes_matches_sklearn():
    from sklearn.naive_bayes import GaussianNB
    d = _data(200, seed=5)
    y = d.defective.astype(int)
    ours = NaiveBayes().fit(d.X, y)
    Z = (d.X - ours.mean_) / ours.scale_
    ref = GaussianNB(var_smoothing=1e-12).fit(Z, y)
    np.testing.assert_allclose(ours.predict_proba(d.X)[:, 1], ref.predict_proba(Z)[:, 1], atol=1e-6)


def test_node_cost():
    assert _node_cost(0.0, 10.0, "gini") == 0.0
    assert _node_cost(5.0, 10.0, "gini") == pytest.approx(5.0)  # n * (1 - .5^2 - .5^2)
    assert _node_cost(5.0, 10.0, "entropy") == pytest.approx(10 * np.log(2))


def test_tree_splits_perfectly_separable_data():
    X = np.array([[1.0], [2.0], [3.0], [10.0], [11.0], [12.0]])
    y = np.array([0, 0, 0, 1, 1, 1])
    tree = grow_tree(X, y, criterion="entropy")
    assert tree.depth == 1
    assert tree.feature[0] == 0 and tree.threshold[0] == pytest.approx(6.5)
    p = tree.predict(X)
    assert np.all(p[:3] < 0.5) and np.all(p[3:] > 0.5)


def test_tree_depth_zero_emits_class_fraction():
    y = np.array([1] * 3 + [0] * 7)
    X = np.arange(10.0).reshape(-1, 1)
    m = DecisionTree(max_depth=0).fit(X, y)
    np.testing.assert_allclose(m.predict_proba(X)[:, 1], 0.3)


def test_forest_one_tree_depth_zero():
    y = np.array([1] * 30 + [0] * 70)
    X = np.random.default_rng(0).normal(size=(100, 3))
    m = RandomForest(n_estimators=1, max_depth=0, random_state=0).fit(X, y)
    np.testing.assert_allclose(m.predict_proba(X)[:, 1], 0.3)


def test_stratified_bootstrap_keeps_class_counts():
    y = np.array([1] * 7 + [0] * 13)
    idx = stratified_bootstrap(y, np.random.default_rng(1))
    assert idx.size == 20
    assert y[idx].sum() == 7


@pytest.mark.parametrize("tag", ["lr", "nb", "ibk", "c50", "cart", "ubag_cart", "ubst_c50"])
def test_train_is_deterministic(tag):
    d = _data(80, seed=3)
    spec = learner_from_tag(tag)
    a = predict_proba(train(spec, d, seed=11), d)
    b = predict_proba(train(spec, d, seed=11), d)
    assert a.tobytes() == b.tobytes()


def test_forest_seed_matters_and_is_reproducible():
    d = _data(80, seed=3)
    spec = LearnerSpec("RandomForest", {"tree_count": 10})
    a = predict_proba(train(spec, d, seed=1), d)
    assert a.tobytes() == predict_proba(train(spec, d, seed=1), d).tobytes()
    assert a.tobytes() != predict_proba(train(spec, d, seed=2), d).tobytes()


def test_predict_label_threshold_inclusive(tmp_path):
    d = Dataset("t", ("f",), [[0.0], [1.0], [2.0]], [1, 1, 1], [0, 1, 0])
    (tmp_path / "t.csv").write_text("0,0.5\n1,0.49\n2,0\n")
    m = train(LearnerSpec("External", {"path": str(tmp_path / "{dataset}.csv")}), d)
    np.testing.assert_array_equal(predict_label(m, d, 0.5), [True, False, False])


def test_schema_mismatch():
    d = _data(40)
    m = train(learner_from_tag("lr"), d)
    other = Dataset("o", ("a", "b", "c", "d"), d.X, d.effort, d.defective)
    with pytest.raises(ValueError, match="schema"):
        predict_proba(m, other)


def test_under_sample_examples():
    y = np.array([1] * 5 + [0] * 100)
    idx = under_sample_indices(y, 1.0, np.random.default_rng(0))
    assert y[idx].sum() == 5 and (y[idx] == 0).sum() == 5
    y = np.array([1] * 5 + [0] * 3)
    idx = under_sample_indices(y, 1.0, np.random.default_rng(0))
    assert (y[idx] == 0).sum() == 3 and y[idx].sum() == 3
    a = under_sample_indices(np.r_[np.ones(5), np.zeros(50)], 1.0, np.random.default_rng(7))
    b = under_sample_indices(np.r_[np.ones(5), np.zeros(50)], 1.0, np.random.default_rng(7))
    np.testing.assert_array_equal(a, b)


def test_under_sample_ratio():
    y = np.array([1] * 10 + [0] * 100)
    idx = under_sample_indices(y, 0.5, np.random.default_rng(0))
    assert (y[idx] == 0).sum() == 20


def test_make_under_bag_sample():
    d = _data(100, rate=0.1)
    s = make_under_bag_sample(d, 1.0, seed=3)
    assert s.n_defective == d.n_defective == len(s) - s.n_defective


def test_under_bagging_mean_of_members():
    d = _data(100, seed=6)
    m = UnderBagging(DecisionTree(), n_estimators=4, random_state=2).fit(d.X, d.defective.astype(int))
    np.testing.assert_allclose(m.predict_proba(d.X)[:, 1], m.member_proba(d.X).mean(axis=0))
    for bag in m.bags_:
        assert d.defective[bag].sum() * 2 == bag.size


def test_rusboost_weights():
    d = _data(150, seed=8)
    m = RUSBoost(DecisionTree(max_depth=1), n_estimators=6, random_state=3).fit(d.X, d.defective.astype(int))
    assert 1 <= len(m.estimators_) == len(m.alphas_) <= 6
    assert all(a > 0 for a in m.alphas_)


def test_learner_tags():
    for tag in LEARNER_TAGS:
        learner_from_tag(tag)
    assert learner_from_tag("knn") == learner_from_tag("ibk")
    spec = learner_from_tag("ubag_rf")
    assert spec.params["base"].build(nested=True).n_estimators == 50
    assert learner_from_tag("rf").build().n_estimators == 200
    assert learner_from_tag("ibk").build().k == 8
    assert learner_from_tag("ubst_cart").params["ir"] == 1.0
    with pytest.raises(ValueError):
        learner_from_tag("jrip")
    assert learner_from_tag("jrip", external={"jrip": "p/{dataset}.csv"}).kind == "External"


def test_bad_specs():
    with pytest.raises(ValueError):
        LearnerSpec("Perceptron")
    with pytest.raises(ValueError):
        LearnerSpec("UnderBagging", {})
    with pytest.raises(ValueError):
        LearnerSpec("KNN", {"k": 0})


def test_sklearn_adapter_svm():
    d = _data(80, seed=1)
    p = predict_proba(train(learner_from_tag("svm"), d, seed=5), d)
    assert p.shape == (80,) and np.all((p >= 0) & (p <= 1))


def test_external_probabilities(tmp_path):
    d = Dataset("ext", ("f",), [[0.0], [1.0], [2.0]], [1, 2, 3], [0, 1, 0], ids=["a", "b", "c"])
    p = tmp_path / "ext.csv"
    p.write_text("id,prob\nc,0.3\na,0.1\nb,0.9\n")
    np.testing.assert_array_equal(load_external_probabilities(p, d), [0.1, 0.9, 0.3])
    spec = learner_from_tag("jrip", external={"jrip": str(tmp_path / "{dataset}.csv")})
    np.testing.assert_array_equal(predict_proba(train(spec, d), d), [0.1, 0.9, 0.3])
    for body in ("a,0.1\nb,0.9\n", "a,0.1\nb,0.9\nc,0.3\nz,0.2\n", "a,0.1\nb,1.5\nc,0.3\n",
                 "a,0.1\na,0.2\nb,0.9\nc,0.3\n"):
        p.write_text(body)
        with pytest.raises(ValueError):
            load_external_probabilities(p, d)
