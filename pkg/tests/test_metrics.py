import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import rouge_l_oracle
from reporteval.metrics import (
    CiderSigmaMode,
    IdfTable,
    MetricConfig,
    bleu,
    cider_r,
    cider_r_case,
    meteor,
    meteor_alignment,
    modified_precision_counts,
    rouge_l,
)

tokens_st = st.lists(st.sampled_from("abcdef"), max_size=14)


class TestBleu:
    def test_identity_is_100_for_all_n(self):
        tokens = "mild atrophy at frontal lobe with widened sulci".split()
        for n in range(1, 5):
            assert bleu(tokens, tokens, n) == pytest.approx(100.0)

    def test_disjoint_is_zero(self):
        assert bleu(["a", "b", "c"], ["x", "y", "z"], 1) == 0.0

    def test_no_shared_fourgram_gives_bleu4_zero(self):
        # matching unigrams but no common 4-gram: no smoothing means 0
        cand = "no evidence of acute infarct".split()
        ref = "acute no infarct evidence midline of".split()
        assert bleu(cand, ref, 1) > 0.0
        assert bleu(cand, ref, 4) == 0.0

    def test_empty_candidate(self):
        assert bleu([], ["a"], 1) == 0.0

    def test_brevity_penalty(self):
        # half-length candidate with perfect precision: BP = e^(1-2) = e^-1
        assert bleu(["a", "b"], ["a", "b", "c", "d"], 1) == pytest.approx(100.0 * math.exp(-1.0))

    def test_truncation_never_increases_clipped_counts(self):
        # Unigram property: dropping a candidate token cannot raise the
        # clipped match count. (For n >= 2 a removal can create a new n-gram
        # across the gap, so the monotonicity claim only holds at n = 1.)
        rng = random.Random(9)
        for _ in range(200):
            cand = [rng.choice("abc") for _ in range(rng.randrange(1, 10))]
            ref = [rng.choice("abc") for _ in range(rng.randrange(1, 10))]
            clipped_full, _ = modified_precision_counts(cand, ref, 1)
            drop = rng.randrange(len(cand))
            clipped_cut, _ = modified_precision_counts(cand[:drop] + cand[drop + 1 :], ref, 1)
            assert clipped_cut <= clipped_full

    @given(tokens_st, tokens_st, st.integers(min_value=1, max_value=4))
    @settings(max_examples=200, deadline=None)
    def test_bounded(self, cand, ref, n):
        assert 0.0 <= bleu(cand, ref, n) <= 100.0 + 1e-9


class TestMeteor:
    def test_identity_closed_form(self):
        tokens = [f"t{i}" for i in range(10)]
        assert meteor(tokens, tokens) == pytest.approx(100.0 * (1 - 0.5 / 1000))

    def test_disjoint(self):
        assert meteor(["a", "b"], ["x", "y"]) == 0.0

    def test_swapped_pair_scores_fifty(self):
        # m=2, chunks=2, P=R=1 -> Fmean=1, penalty=0.5 -> 50
        assert meteor(["a", "b"], ["b", "a"]) == pytest.approx(50.0)

    def test_empty_sides(self):
        assert meteor([], ["a"]) == 0.0
        assert meteor(["a"], []) == 0.0

    def test_alignment_counts(self):
        assert meteor_alignment(["a", "b"], ["b", "a"]) == (2, 2)
        assert meteor_alignment(list("abcabc"), list("abcabc")) == (6, 1)
        assert meteor_alignment(["a", "a"], ["a"]) == (1, 1)

    def test_matches_are_min_counts(self):
        rng = random.Random(13)
        for _ in range(100):
            cand = [rng.choice("ab") for _ in range(rng.randrange(1, 9))]
            ref = [rng.choice("ab") for _ in range(rng.randrange(1, 9))]
            matches, chunks = meteor_alignment(cand, ref)
            expected = sum(
                min(cand.count(w), ref.count(w)) for w in set(cand) | set(ref)
            )
            assert matches == expected
            if matches:
                assert 1 <= chunks <= matches

    @given(tokens_st, tokens_st)
    @settings(max_examples=200, deadline=None)
    def test_bounded(self, cand, ref):
        assert 0.0 <= meteor(cand, ref) <= 100.0 + 1e-9


class TestRougeL:
    def test_identity(self):
        tokens = "no midline shift seen".split()
        assert rouge_l(tokens, tokens) == pytest.approx(100.0)

    def test_disjoint(self):
        assert rouge_l(["a"], ["b"]) == 0.0

    def test_derived_example_from_oracle(self):
        # lcs=2, P=2/3, R=1, beta=1.2: (1+1.44)*(2/3)/(1+1.44*2/3) = 0.8299
        expected = rouge_l_oracle(["a", "x", "b"], ["a", "b"])
        assert expected == pytest.approx(82.9932, abs=1e-3)
        assert rouge_l(["a", "x", "b"], ["a", "b"]) == pytest.approx(expected)

    def test_matches_oracle_on_random_instances(self):
        rng = random.Random(21)
        for _ in range(400):
            cand = [rng.choice("abcd") for _ in range(rng.randrange(0, 12))]
            ref = [rng.choice("abcd") for _ in range(rng.randrange(0, 12))]
            assert rouge_l(cand, ref) == pytest.approx(rouge_l_oracle(cand, ref))

    @given(tokens_st, tokens_st)
    @settings(max_examples=200, deadline=None)
    def test_bounded(self, cand, ref):
        assert 0.0 <= rouge_l(cand, ref) <= 100.0 + 1e-9


def identity_corpus(k=4):
    sentences = [
        "mild atrophy at frontal lobe with widened sulci noted".split(),
        "subdural hematoma along left convexity causing buckling".split(),
        "old lacunar infarcts in bilateral thalami and putamen".split(),
        "calcification of cavernous internal carotid arteries seen today".split(),
    ]
    return [(s, s) for s in sentences[:k]]


class TestCiderR:
    def test_identity_corpus_scores_1000(self):
        scores, mean = cider_r(identity_corpus())
        for score in scores:
            assert score == pytest.approx(1000.0)
        assert mean == pytest.approx(1000.0)

    def test_disjoint_candidate_scores_zero(self):
        units = identity_corpus()
        units.append(("totally unrelated words here".split(), units[0][1]))
        scores, _ = cider_r(units)
        assert scores[-1] == 0.0

    def test_degenerate_cosine_toy_corpus(self):
        # refs are identical so every ref n-gram has df = N and idf 0; both
        # cases hit the documented zero-norm -> 0 rule
        units = [(["a", "b"], ["a", "b"]), (["a", "c"], ["a", "b"])]
        idf = IdfTable.from_reference_units([r for _, r in units])
        assert idf.weight(("a",), 1) == 0.0
        assert idf.weight(("b",), 1) == 0.0
        scores, mean = cider_r(units, idf)
        assert scores == [0.0, 0.0]
        assert mean == 0.0

    def test_duplication_invariance(self):
        units = identity_corpus()
        units.append(("mild atrophy at frontal lobe".split(), units[0][1]))
        base_refs = [r for _, r in units]
        idf1 = IdfTable.from_reference_units(base_refs)
        idf3 = IdfTable.from_reference_units(base_refs * 3)
        for cand, ref in units:
            assert cider_r_case(cand, ref, idf1) == pytest.approx(cider_r_case(cand, ref, idf3))

    def test_length_penalty_modes(self):
        units = identity_corpus()
        ref = units[0][1]
        long_cand = list(ref) + ["extra"] * 12
        idf = IdfTable.from_reference_units([r for _, r in units])
        fixed = cider_r_case(long_cand, ref, idf, MetricConfig(cider_sigma_mode=CiderSigmaMode.FIXED6))
        relative = cider_r_case(
            long_cand, ref, idf, MetricConfig(cider_sigma_mode=CiderSigmaMode.REF_RELATIVE)
        )
        # sigma = max(6, 0.1*|r|) = 6 for short references: modes agree here
        assert fixed == pytest.approx(relative)
        long_ref = [f"w{i}" for i in range(80)]
        idf2 = IdfTable.from_reference_units([long_ref] + [r for _, r in units])
        fixed = cider_r_case(long_ref + ["x"] * 10, long_ref, idf2, MetricConfig(cider_sigma_mode=CiderSigmaMode.FIXED6))
        relative = cider_r_case(
            long_ref + ["x"] * 10, long_ref, idf2, MetricConfig(cider_sigma_mode=CiderSigmaMode.REF_RELATIVE)
        )
        assert relative > fixed  # wider sigma forgives the length gap

    def test_repetition_clipped(self):
        units = identity_corpus()
        ref = units[0][1]
        stuttering = list(ref) + [ref[0]] * 6
        idf = IdfTable.from_reference_units([r for _, r in units])
        clean = cider_r_case(list(ref), ref, idf)
        stuttered = cider_r_case(stuttering, ref, idf)
        assert stuttered < clean

    def test_empty_reference_units_rejected(self):
        with pytest.raises(ValueError):
            IdfTable.from_reference_units([])

    def test_idf_weights(self):
        idf = IdfTable.from_reference_units([["a", "b"], ["a", "c"], ["a", "d"]])
        assert idf.weight(("zzz",), 1) == pytest.approx(math.log(3))  # unseen: max weight
        assert idf.weight(("a",), 1) == pytest.approx(0.0)  # df = N
        assert idf.weight(("b",), 1) == pytest.approx(math.log(3))  # df = 1

    def test_bounded_on_random_instances(self):
        rng = random.Random(17)
        refs = [[rng.choice("abcde") for _ in range(rng.randrange(1, 10))] for _ in range(8)]
        idf = IdfTable.from_reference_units(refs)
        for _ in range(200):
            cand = [rng.choice("abcdef") for _ in range(rng.randrange(0, 12))]
            score = cider_r_case(cand, rng.choice(refs), idf)
            assert 0.0 <= score <= 1000.0 + 1e-9
