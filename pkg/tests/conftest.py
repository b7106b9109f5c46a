import itertools

import pytest

from editkit import corpus as C
from editkit.tags import label_index
from editkit.vocab import select_frequency


def brute_force_lcs_len(a, b):
    """Length of the longest common subsequence by trying every subsequence of a."""
    best = 0
    for k in range(len(a), 0, -1):
        for idx in itertools.combinations(range(len(a)), k):
            sub = [a[i] for i in idx]
            it = iter(b)
            if all(tok in it for tok in sub):
                return k
    return best


class FusionExperiment:
    """Train-split vocabulary, tagged train and held-out examples."""

    def __init__(self):
        self.corpus = C.load_bundled()
        train = self.corpus.split("train")
        held_out = self.corpus.split("validation", "test")
        self.vocab = select_frequency(C.phrase_sets(train), 500, train.corpus_id)
        self.index = label_index(self.vocab, enable_swap=True)
        self.train = self._tagged(train)
        self.held_out = self._tagged(held_out)

    def _tagged(self, corpus):
        tagged, _ = C.convert_corpus(corpus, self.vocab)
        return [(ex.source_tokens(), ex.tags) for ex in tagged if ex.tags.convertible]


@pytest.fixture(scope="session")
def fusion_experiment():
    return FusionExperiment()


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(module.RESULTS):
        terminalreporter.write_line(module.RESULTS[n])
