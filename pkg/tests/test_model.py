from editkit.model import (
    MajorityModel,
    PerceptronModel,
    TrainConfig,
    load_model,
    majority_baseline,
    save_model,
    token_accuracy,
    token_features,
    train,
)
from editkit.tags import DELETE, KEEP, Base, EditTag, TagSequence, label_index
from editkit.text import tokenize
from editkit.vocab import PhraseVocabulary

VOCAB = PhraseVocabulary(((",",), ("and",)))
INDEX = label_index(VOCAB, enable_swap=True)


def test_features_are_deterministic():
    toks = tokenize("Dylan won. He sang.")
    assert token_features(toks) == token_features(toks)
    assert len(token_features(toks)) == len(toks)


def test_untrained_model_predicts_first_label():
    model = PerceptronModel(INDEX)
    assert model.predict_ids(("a", "b", "c")) == [0, 0, 0]


def test_memorizes_single_example():
    toks = tokenize("He sang. He danced.")
    tags = TagSequence((KEEP, KEEP, DELETE, DELETE, EditTag(Base.KEEP, ("and",)), KEEP))
    model = train([(toks, tags)], INDEX, TrainConfig(epochs=10))
    assert model.predict_tags(toks) == tags


def test_fixed_seed_gives_identical_weights(fusion_experiment):
    fx = fusion_experiment
    a = train(fx.train, fx.index, TrainConfig(epochs=3, seed=5))
    b = train(fx.train, fx.index, TrainConfig(epochs=3, seed=5))
    assert a.weights == b.weights


def test_training_accuracy(fusion_experiment):
    fx = fusion_experiment
    model = train(fx.train, fx.index, TrainConfig(epochs=20))
    assert token_accuracy(model, fx.train) >= 0.95


def test_autoregressive_not_worse_than_feedforward(fusion_experiment):
    fx = fusion_experiment
    ar = train(fx.train, fx.index, TrainConfig(seed=0, mode="ar"))
    ff = train(fx.train, fx.index, TrainConfig(seed=0, mode="ff"))
    assert token_accuracy(ar, fx.held_out) >= token_accuracy(ff, fx.held_out)


def test_perceptron_beats_majority(fusion_experiment):
    fx = fusion_experiment
    model = train(fx.train, fx.index, TrainConfig(seed=0))
    baseline = majority_baseline(fx.train, fx.index)
    assert token_accuracy(model, fx.held_out) >= token_accuracy(baseline, fx.held_out)


def test_majority_identity_corpus_and_unseen_tokens():
    toks = tokenize("A b c.")
    model = majority_baseline([(toks, TagSequence((KEEP,) * 4))], INDEX)
    assert list(model.predict_tags(toks)) == [KEEP] * 4
    assert list(model.predict_tags(("zzz",))) == [KEEP]


def test_prediction_length_matches_input(fusion_experiment):
    fx = fusion_experiment
    model = train(fx.train, fx.index, TrainConfig(epochs=2))
    for toks, _ in fx.held_out:
        assert len(model.predict_ids(toks)) == len(toks)


def test_persistence_round_trip(tmp_path, fusion_experiment):
    fx = fusion_experiment
    model = train(fx.train, fx.index, TrainConfig(epochs=3))
    path = tmp_path / "m.txt"
    save_model(model, path)
    back = load_model(path)
    assert isinstance(back, PerceptronModel)
    for toks, _ in fx.held_out:
        assert back.predict_ids(toks) == model.predict_ids(toks)
    save_model(back, tmp_path / "m2.txt")
    assert (tmp_path / "m2.txt").read_bytes() == path.read_bytes()

    base = majority_baseline(fx.train, fx.index)
    save_model(base, tmp_path / "b.txt")
    back = load_model(tmp_path / "b.txt")
    assert isinstance(back, MajorityModel)
    assert all(back.predict_ids(t) == base.predict_ids(t) for t, _ in fx.held_out)
