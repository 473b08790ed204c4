import numpy as np
import pytest

from relgen import (CueDiscourseBackend, CueLexicon, GenerationConfig, GenerationRecord,
                    GenerationResult, LmBackend, StopReason, Token, Vocabulary, train_ngram)
from relgen.discourse import CueEntry
from relgen.errors import EmptyText, InconsistentBatch
from relgen.evaluation import (build_report, completion_perplexity, relation_correct)


def test_dominant_cue_is_correct(desk_parser, taxonomy):
    assert relation_correct(desk_parser, "he came home ,", "because it rained",
                            taxonomy.parse("Cause_NS"))
    assert not relation_correct(desk_parser, "he came home ,", "because it rained",
                                taxonomy.parse("Contrast_NN"))


def test_no_cues_resolve_to_lowest_index(desk_parser, taxonomy):
    # all-zero logits: the argmax tie resolves to taxonomy index 0
    assert relation_correct(desk_parser, "he came home ,", "she stayed there", taxonomy[0])
    assert not relation_correct(desk_parser, "he came home ,", "she stayed there", taxonomy[1])


def test_empty_text_rejected(desk_parser, taxonomy):
    with pytest.raises(EmptyText):
        relation_correct(desk_parser, "", "completion", taxonomy[0])
    with pytest.raises(EmptyText):
        relation_correct(desk_parser, "prompt", "  ", taxonomy[0])


def test_batch_percentages_match_pairwise_scan(desk_parser, desk_prompts, taxonomy):
    relation = taxonomy.parse("Contrast_NN")
    completions = ["but he left", "she stayed home", "but it broke", "because it rained"]
    outcomes = []
    for prompt, completion in zip(desk_prompts, completions * 20):
        outcomes.append(relation_correct(desk_parser, prompt, completion, relation))
    # independent scan: exactly the completions opening with a Contrast cue count
    expected = [c.split()[0] in {"but", "instead"} for c in completions * 20][:len(desk_prompts)]
    assert outcomes == expected
    assert 100.0 * sum(outcomes) / len(outcomes) == pytest.approx(50.0)


class UniformLm(LmBackend):
    """Assigns 1/|V| to every token, for closed-form perplexity checks."""

    def __init__(self, words):
        self.vocabulary = Vocabulary(list(words), unknown_id=0)

    def encode(self, text):
        return [self.vocabulary.token(w) if w in self.vocabulary else Token(0, w)
                for w in text.split()]

    def decode(self, tokens):
        return " ".join(t.surface for t in tokens)

    def next_distribution(self, prompt, generated):
        n = len(self.vocabulary)
        return np.full(n, 1.0 / n)


class CertainLm(UniformLm):
    """Assigns probability 1 to a single token id at every step."""

    def __init__(self, words, always_id):
        super().__init__(words)
        self.always_id = always_id

    def next_distribution(self, prompt, generated):
        dist = np.zeros(len(self.vocabulary))
        dist[self.always_id] = 1.0
        return dist


def test_certain_model_has_perplexity_one():
    lm = CertainLm(["<unk>", "a", "b"], always_id=1)
    assert completion_perplexity(lm, "b", "a a a") == pytest.approx(1.0, abs=1e-12)


def test_uniform_model_perplexity_equals_vocab_size():
    lm = UniformLm([f"w{i}" for i in range(10)])
    assert completion_perplexity(lm, "w1", "w2 w3 w4") == pytest.approx(10.0, rel=1e-12)


def test_perplexity_matches_chain_rule_oracle(desk_lm):
    prompt = "the sky turned dark ,"
    completion = "because it rained all day ."
    prompt_tokens = desk_lm.encode(prompt)
    completion_tokens = desk_lm.encode(completion)
    logprob = 0.0
    history = list(prompt_tokens)
    for token in completion_tokens:
        dist = desk_lm.next_distribution(history, [])
        logprob += float(np.log(dist[token.id]))
        history.append(token)
    expected = float(np.exp(-logprob / len(completion_tokens)))
    got = completion_perplexity(desk_lm, prompt, completion)
    assert got == pytest.approx(expected, rel=1e-9)


def test_perplexity_ignores_context_beyond_model_order(desk_lm):
    # a bigram only sees the last prompt token, so a longer prefix is inert
    short = completion_perplexity(desk_lm, "dark ,", "because it rained")
    long = completion_perplexity(desk_lm, "entirely novel words before dark ,", "because it rained")
    assert short == pytest.approx(long, abs=0)


# --- report building --------------------------------------------------------


def record(prompt, relation, completion):
    config = GenerationConfig()
    tokens = tuple(Token(0, w) for w in completion.split())
    result = GenerationResult(completion, tokens, (), StopReason.PERIOD)
    return GenerationRecord(prompt, relation, config, result)


@pytest.fixture()
def tiny_lm():
    return train_ngram(
        ["she stayed , but he left .", "she stayed , because it rained ."],
        order=2, delta=0.5,
    )


@pytest.fixture()
def tiny_parser(taxonomy):
    entries = [CueEntry(("but",), taxonomy.parse("Contrast_NN"), 3.0),
               CueEntry(("because",), taxonomy.parse("Cause_NS"), 3.0)]
    return CueDiscourseBackend(CueLexicon(entries, {"but", "because"}, {"."}), taxonomy)


def test_all_correct_batch_reports_hundred_percent(tiny_lm, tiny_parser):
    records = []
    for prompt in ("she stayed ,", "he waited ,"):
        records.append(record(prompt, "Contrast_NN", "but he left ."))
        records.append(record(prompt, "Cause_NS", "because it rained ."))
        records.append(record(prompt, None, "she stayed ."))
    report = build_report(tiny_lm, tiny_parser, records)
    assert [row.relation for row in report.rows] == ["Cause_NS", "Contrast_NN"]
    assert all(row.correct_percent == 100.0 for row in report.rows)
    assert report.all_row.correct_percent == 100.0
    assert report.baseline_row.correct_percent is None
    assert report.n_per_relation == 2


def test_half_correct_single_relation(tiny_lm, tiny_parser):
    records = [
        record("she stayed ,", "Contrast_NN", "but he left ."),
        record("she stayed ,", None, "it rained ."),
        record("he waited ,", "Contrast_NN", "because it rained ."),
        record("he waited ,", None, "it rained ."),
    ]
    report = build_report(tiny_lm, tiny_parser, records)
    assert report.rows[0].correct_percent == pytest.approx(50.0)


def test_aggregate_row_is_count_weighted(tiny_lm, tiny_parser):
    records = [
        record("p1 x ,", "Contrast_NN", "but he left ."),
        record("p1 x ,", "Cause_NS", "but he left ."),  # wrong for Cause
        record("p1 x ,", None, "it rained ."),
        record("p2 y ,", "Contrast_NN", "but he left ."),
        record("p2 y ,", "Cause_NS", "because it rained ."),
        record("p2 y ,", None, "it rained ."),
    ]
    report = build_report(tiny_lm, tiny_parser, records)
    by_name = {row.relation: row for row in report.rows}
    assert by_name["Contrast_NN"].correct_percent == 100.0
    assert by_name["Cause_NS"].correct_percent == 50.0
    assert report.all_row.correct_percent == pytest.approx(75.0)
    # count-weighted mean of the per-relation rows
    weighted = sum(row.correct_percent * row.n for row in report.rows) / sum(row.n for row in report.rows)
    assert report.all_row.correct_percent == pytest.approx(weighted)


def test_missing_baseline_is_inconsistent(tiny_lm, tiny_parser):
    records = [record("she stayed ,", "Contrast_NN", "but he left .")]
    with pytest.raises(InconsistentBatch):
        build_report(tiny_lm, tiny_parser, records)


def test_missing_relation_for_one_prompt_is_inconsistent(tiny_lm, tiny_parser):
    records = [
        record("p1 ,", "Contrast_NN", "but he left ."),
        record("p1 ,", None, "it rained ."),
        record("p2 ,", None, "it rained ."),
    ]
    with pytest.raises(InconsistentBatch):
        build_report(tiny_lm, tiny_parser, records)


def test_report_is_order_independent(tiny_lm, tiny_parser):
    records = [
        record("she stayed ,", "Contrast_NN", "but he left ."),
        record("she stayed ,", None, "it rained ."),
        record("he waited ,", "Contrast_NN", "but it broke ."),
        record("he waited ,", None, "it rained ."),
    ]
    forward = build_report(tiny_lm, tiny_parser, records)
    backward = build_report(tiny_lm, tiny_parser, list(reversed(records)))
    assert forward == backward


def test_report_renders_csv_and_text(tiny_lm, tiny_parser):
    records = [
        record("she stayed ,", "Contrast_NN", "but he left ."),
        record("she stayed ,", None, "it rained ."),
    ]
    report = build_report(tiny_lm, tiny_parser, records)
    csv_text = report.to_csv()
    assert csv_text.splitlines()[0] == "relation,correct_percent,mean_perplexity,n"
    assert "All Relations" in csv_text and "None" in csv_text
    table = report.to_text()
    assert "Contrast_NN" in table and "-" in table
