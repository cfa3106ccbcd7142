import json
import sys
import textwrap

import numpy as np
import pytest

from conftest import make_case
from oracles import tfidf_cosine_oracle
from reporteval.pairing import (
    ExternalEmbedder,
    FallbackEmbedder,
    PairingError,
    ProviderError,
    build_provider,
    pair_sentences,
    paired_variant,
)


def cosine(u, v):
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        return 0.0
    return float(u @ v) / (nu * nv)


class TestFallbackEmbedder:
    def test_self_similarity(self):
        sentences = ["no midline shift", "mild atrophy at frontal lobe"]
        provider = FallbackEmbedder.fit(sentences)
        vectors = provider.embed(["no midline shift", "no midline shift"])
        assert cosine(vectors[0], vectors[1]) == pytest.approx(1.0, abs=1e-9)

    def test_disjoint_sentences_orthogonal(self):
        # disjoint words and disjoint character 3-grams
        a, b = "aaa bbb", "xy zq"
        provider = FallbackEmbedder.fit([a, b])
        vectors = provider.embed([a, b])
        assert cosine(vectors[0], vectors[1]) == pytest.approx(0.0, abs=1e-12)

    def test_paraphrase_cosine_above_half_and_matches_oracle(self):
        a, b = "no midline shift", "no midline shifting"
        provider = FallbackEmbedder.fit([a, b])
        vectors = provider.embed([a, b])
        got = cosine(vectors[0], vectors[1])
        assert got == pytest.approx(tfidf_cosine_oracle(a, b, [a, b]), abs=1e-9)
        assert got > 0.5

    def test_vectors_are_unit_norm(self):
        provider = FallbackEmbedder.fit(["one sentence", "another sentence"])
        vectors = provider.embed(["one sentence", "another sentence", ""])
        assert np.linalg.norm(vectors[0]) == pytest.approx(1.0)
        assert np.linalg.norm(vectors[2]) == 0.0  # no features -> zero vector

    def test_deterministic(self):
        sentences = ["alpha beta", "gamma delta", "alpha gamma"]
        v1 = FallbackEmbedder.fit(sentences).embed(sentences)
        v2 = FallbackEmbedder.fit(sentences).embed(sentences)
        assert np.array_equal(v1, v2)


class TestPairSentences:
    def test_identity_reports_pair_in_order(self):
        case = make_case("c", "> first finding.\n> second finding.", "> first finding.\n> second finding.")
        assignment = pair_sentences(case.candidate, case.reference)
        assert [(ci, ri) for ci, ri, _ in assignment.pairs] == [(0, 0), (1, 1)]
        assert all(cos == pytest.approx(1.0, abs=1e-9) for _, _, cos in assignment.pairs)

    def test_shared_words_win(self):
        case = make_case(
            "c",
            "> subdural hematoma at left convexity.",
            "> mild atrophy.\n> subdural hematoma at left convexity noted.\n> no fracture.",
        )
        assignment = pair_sentences(case.candidate, case.reference)
        assert assignment.pairs[0][1] == 1

    def test_many_to_one(self):
        case = make_case(
            "c",
            "> subdural hematoma here.\n> subdural hematoma there.",
            "> subdural hematoma noted.\n> unrelated words entirely.",
        )
        assignment = pair_sentences(case.candidate, case.reference)
        assert [ri for _, ri, _ in assignment.pairs] == [0, 0]

    def test_reference_permutation_preserves_pair_texts(self):
        cand = "> atrophy noted.\n> subdural hematoma."
        ref_a = "> atrophy present.\n> subdural hematoma seen.\n> no fracture."
        ref_b = "> no fracture.\n> subdural hematoma seen.\n> atrophy present."
        case_a = make_case("a", cand, ref_a)
        case_b = make_case("b", cand, ref_b)
        texts_a = sorted(
            (c.text, r.text) for c, r in paired_variant(case_a)
        )
        texts_b = sorted(
            (c.text, r.text) for c, r in paired_variant(case_b)
        )
        assert texts_a == texts_b

    def test_empty_side_raises(self):
        case = make_case("c", "> something.", "> something.")
        empty = make_case("e", "> x.", "> y.")
        object.__setattr__(empty.reference, "items", ())
        with pytest.raises(PairingError):
            pair_sentences(case.candidate, empty.reference)

    def test_cosine_symmetry(self):
        sentences = ["no midline shift", "mild atrophy", "subdural hematoma"]
        provider = FallbackEmbedder.fit(sentences)
        vectors = provider.embed(sentences)
        for i in range(3):
            for j in range(3):
                assert cosine(vectors[i], vectors[j]) == pytest.approx(
                    cosine(vectors[j], vectors[i]), abs=1e-9
                )

    def test_deterministic_tie_break(self):
        # two identical reference items: argmax must take the lower index
        case = make_case("c", "> mild atrophy.", "> mild atrophy.\n> mild atrophy.")
        assignment = pair_sentences(case.candidate, case.reference)
        assert assignment.pairs[0][1] == 0


ECHO_PROVIDER = textwrap.dedent(
    """
    import json, sys
    batch = json.load(sys.stdin)
    vectors = []
    for s in batch["sentences"]:
        vectors.append([float(len(s)), float(sum(map(ord, s)) % 97), 1.0])
    json.dump({"batch_id": batch["batch_id"], "vectors": vectors}, sys.stdout)
    """
)


class TestExternalEmbedder:
    def test_command_protocol(self, tmp_path):
        script = tmp_path / "provider.py"
        script.write_text(ECHO_PROVIDER)
        provider = ExternalEmbedder(f"{sys.executable} {script}")
        vectors = provider.embed(["abc", "defg"])
        assert vectors.shape == (2, 3)
        assert vectors[0, 0] == 3.0
        assert provider.dimension == 3

    def test_wrong_batch_id_rejected(self, tmp_path):
        script = tmp_path / "bad.py"
        script.write_text(
            'import json,sys; b=json.load(sys.stdin); '
            'json.dump({"batch_id": "nope", "vectors": [[1.0]]*len(b["sentences"])}, sys.stdout)'
        )
        provider = ExternalEmbedder(f"{sys.executable} {script}")
        with pytest.raises(ProviderError, match="batch"):
            provider.embed(["a"])

    def test_wrong_vector_count_rejected(self, tmp_path):
        script = tmp_path / "short.py"
        script.write_text(
            'import json,sys; b=json.load(sys.stdin); '
            'json.dump({"batch_id": b["batch_id"], "vectors": [[1.0]]}, sys.stdout)'
        )
        provider = ExternalEmbedder(f"{sys.executable} {script}")
        with pytest.raises(ProviderError, match="expected 2 vectors"):
            provider.embed(["a", "b"])

    def test_nonfinite_rejected(self, tmp_path):
        script = tmp_path / "nan.py"
        script.write_text(
            'import json,sys; b=json.load(sys.stdin); '
            'json.dump({"batch_id": b["batch_id"], "vectors": [[float("nan")]]}, sys.stdout)'
        )
        provider = ExternalEmbedder(f"{sys.executable} {script}")
        with pytest.raises(ProviderError, match="malformed"):
            provider.embed(["a"])

    def test_pairing_with_external_provider(self, tmp_path):
        script = tmp_path / "provider.py"
        script.write_text(ECHO_PROVIDER)
        case = make_case("c", "> aaa.\n> dddd.", "> aaa.\n> dddd.")
        provider = build_provider(f"external:{sys.executable} {script}")
        assignment = pair_sentences(case.candidate, case.reference, provider)
        assert len(assignment.pairs) == 2

    def test_build_provider_specs(self):
        provider = build_provider("fallback", ["a b", "c d"])
        assert provider.dimension > 0
        with pytest.raises(ValueError):
            build_provider("magic")
