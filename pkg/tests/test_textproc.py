import random

import pytest

from reporteval.textproc import (
    DEFAULT_NEGATION_CUES,
    NegationConfig,
    NegationMode,
    itemize_texts,
    join_items,
    ngrams,
    remove_negation_texts,
    split_clauses,
    tokenize,
)


class TestTokenize:
    def test_basic_lowercasing(self):
        assert tokenize("No midline shift.") == ["no", "midline", "shift"]

    def test_acronym_lowercased(self):
        assert tokenize("SDH") == ["sdh"]

    def test_decimal_number_kept_whole(self):
        assert tokenize("about 2.0cm in thickness") == ["about", "2.0", "cm", "in", "thickness"]

    def test_slash_and_hyphen_split(self):
        assert tokenize("r/l fronto-parietal") == ["r", "l", "fronto", "parietal"]

    def test_punctuation_discarded(self):
        assert tokenize("shift, to; right (side).") == ["shift", "to", "right", "side"]

    def test_empty(self):
        assert tokenize("") == []


class TestNgrams:
    def test_bigram_counts(self):
        grams = ngrams(["a", "b", "c"], 2)
        assert grams == {("a", "b"): 1, ("b", "c"): 1}

    def test_multiplicity(self):
        assert ngrams(["a", "a", "a"], 1) == {("a",): 3}

    def test_n_longer_than_tokens(self):
        assert ngrams(["a", "b"], 5) == {}

    def test_invalid_n(self):
        with pytest.raises(ValueError):
            ngrams(["a"], 0)

    def test_cardinality_property(self):
        rng = random.Random(7)
        for _ in range(50):
            tokens = [rng.choice("abc") for _ in range(rng.randrange(0, 15))]
            n = rng.randrange(1, 5)
            assert sum(ngrams(tokens, n).values()) == max(0, len(tokens) - n + 1)


class TestItemize:
    def test_two_bullets(self):
        assert itemize_texts("> no midline shift.\n> mild atrophy.") == [
            "no midline shift.",
            "mild atrophy.",
        ]

    def test_empty_text(self):
        assert itemize_texts("") == []
        assert itemize_texts("  \n \n") == []

    def test_decimal_period_not_a_boundary(self):
        assert itemize_texts("up to 2.0cm.") == ["up to 2.0cm."]
        assert itemize_texts("> sdh up to 2.0 cm in thickness. mass effect noted.") == [
            "sdh up to 2.0 cm in thickness.",
            "mass effect noted.",
        ]

    def test_abbreviation_period_not_a_boundary(self):
        items = itemize_texts("> low density patches without mass effect. r/l small vascular ischemic disease.")
        assert items == [
            "low density patches without mass effect.",
            "r/l small vascular ischemic disease.",
        ]
        # measurement-unit dots do not end sentences
        assert itemize_texts("sdh at falx, up to 2.0cm. mass effect with midline shift.") == [
            "sdh at falx, up to 2.0cm. mass effect with midline shift."
        ]

    def test_section_headers_become_items(self):
        items = itemize_texts("Findings\n> mild atrophy.\nConclusion Senile change.")
        assert items == ["Findings", "mild atrophy.", "Conclusion", "Senile change."]

    def test_sentence_split_inside_bullet(self):
        items = itemize_texts("> Old infarct in right hemisphere. Senile change.")
        assert items == ["Old infarct in right hemisphere.", "Senile change."]

    def test_join_roundtrip(self):
        texts = ["no midline shift.", "mild atrophy.", "Conclusion", "Senile change."]
        assert itemize_texts(join_items(texts)) == texts

    def test_roundtrip_plain_join(self):
        # joining with "\n> " alone (no leading marker) also reproduces items
        texts = ["first finding.", "second finding."]
        assert itemize_texts("\n> ".join(texts)) == texts

    def test_determinism(self):
        raw = "> a finding. another one.\nConclusion Something."
        assert itemize_texts(raw) == itemize_texts(raw)


class TestNegationRemoval:
    def test_fully_negated_item_removed(self):
        result = remove_negation_texts(
            ["no intracerebral hemorrhage and no midline shift is seen."]
        )
        assert result.kept == ()
        assert len(result.removed) == 1

    def test_clause_trim_keeps_positive_head(self):
        result = remove_negation_texts(
            ["low density patches at bilateral periventricular white matter without mass effect."]
        )
        assert result.kept == ("low density patches at bilateral periventricular white matter",)

    def test_no_cues_identity(self):
        texts = ["mild atrophy at frontal lobe.", "old infarct in right hemisphere."]
        result = remove_negation_texts(texts)
        assert result.kept == tuple(texts)
        assert result.removed == ()

    def test_comma_clause_dropped(self):
        result = remove_negation_texts(["sdh at left convexity, no midline shift, mild atrophy."])
        assert result.kept == ("sdh at left convexity, mild atrophy.",)

    def test_drop_item_mode(self):
        config = NegationConfig(mode=NegationMode.DROP_ITEM)
        result = remove_negation_texts(
            ["low density patches without mass effect.", "mild atrophy."], config
        )
        assert result.kept == ("mild atrophy.",)
        assert result.removed == ("low density patches without mass effect.",)

    def test_idempotent(self):
        texts = [
            "no obvious midline shifting or intracerebral hemorrhage can be found.",
            "low density patches at white matter without mass effect.",
            "mild atrophy, no fracture, widened sulci.",
        ]
        once = remove_negation_texts(texts)
        twice = remove_negation_texts(list(once.kept))
        assert twice.kept == once.kept
        assert twice.removed == ()

    def test_no_cue_survives_clause_trim(self):
        rng = random.Random(11)
        vocab = ["atrophy", "no", "shift", "without", "effect", "mild", "sulci", "not", "mass"]
        config = NegationConfig()
        for _ in range(100):
            text = " ".join(rng.choice(vocab) for _ in range(rng.randrange(1, 12)))
            kept = remove_negation_texts([text], config).kept
            for item in kept:
                assert not (set(tokenize(item)) & DEFAULT_NEGATION_CUES)

    def test_substring_is_not_a_cue(self):
        # "nothing" contains "no" but is not a cue token
        result = remove_negation_texts(["otherwise nothing remarkable."])
        assert result.kept == ("otherwise nothing remarkable.",)

    def test_cue_validation(self):
        with pytest.raises(ValueError):
            NegationConfig(cue_tokens=frozenset())
        with pytest.raises(ValueError):
            NegationConfig(cue_tokens=frozenset({"No"}))

    def test_config_from_json(self, tmp_path):
        path = tmp_path / "neg.json"
        path.write_text('{"cue_tokens": ["NO", "denies"], "mode": "drop_item"}')
        config = NegationConfig.from_json(str(path))
        assert config.cue_tokens == frozenset({"no", "denies"})
        assert config.mode is NegationMode.DROP_ITEM


class TestSplitClauses:
    def test_cue_cut_before_token(self):
        clauses = split_clauses("mild atrophy without mass effect", NegationConfig())
        assert clauses == [("mild atrophy", False), ("without mass effect", True)]

    def test_plain_text_single_clause(self):
        assert split_clauses("mild atrophy", NegationConfig()) == [("mild atrophy", False)]
