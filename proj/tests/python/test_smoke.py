import math
import os
from pathlib import Path

import pytest

import zeqr

BENCH = Path(os.environ.get("ZEQR_SOURCE_DIR", Path(__file__).resolve().parents[2])) / "data" / "minibench"

Q1 = "I just had a breast biopsy for cancer. What are the most common types?"
Q2 = "Once it breaks out, how likely is it to spread?"
Q3 = "How deadly is Lobular Carcinoma in Situ?"
Q4 = "Wow, that is better than I thought.  What are common treatments?"
A3 = "...In this case it will be described as Lobular Neoplasia..."


def session():
    return zeqr.Session("31", [
        zeqr.Turn(1, Q1, "...Non-invasive breast cancer is when the cancer is..."),
        zeqr.Turn(2, Q2, "...How is Lobular Carcinoma in Situ diagnosed? You often..."),
        zeqr.Turn(3, Q3, A3),
        zeqr.Turn(4, Q4),
    ])


def test_context_and_templates():
    ctx = zeqr.context_for_turn(session(), 4)
    assert ctx.prior_queries == [Q1, Q2, Q3]
    assert ctx.latest_answer == A3
    assert zeqr.context_for_turn(session(), 1).empty()
    assert zeqr.make_coref_question("that", Q4) == f'What is that refer to, in "{Q4}"'
    assert zeqr.make_omission_question("spread", zeqr.WordKind.verb, Q2) == f'spread to what, in "{Q2}"'
    with pytest.raises(zeqr.RangeError):
        zeqr.context_for_turn(session(), 9)


def test_detectors():
    tokens = zeqr.tokenize_and_tag(Q4)
    assert all(Q4[t.char_start:t.char_end] == t.text for t in tokens)
    assert [p.surface for p in zeqr.detect_pronouns(Q4)] == ["that"]
    cands = zeqr.find_omission_candidates(Q4, {"treatments": 4.0})
    assert [(c.surface, c.kind) for c in cands] == [("treatments", zeqr.WordKind.noun)]


def test_reformulate_with_dict_and_callable():
    ctx = zeqr.context_for_turn(session(), 4)
    idf = {"treatments": 4.0}
    oracle = {"What is that refer to": "Lobular Neoplasia", "treatments of what": "Lobular Carcinoma in Situ"}
    trace = zeqr.reformulate(Q4, ctx, idf, oracle)
    expected = ("Wow, Lobular Neoplasia is better than I thought.  "
                "What are common treatments of Lobular Carcinoma in Situ?")
    assert trace.q_double_star == expected

    asked = []

    def reader(question, context):
        asked.append(question)
        if question.startswith("What is that"):
            return ("Lobular Neoplasia", 0.9)
        if question.startswith("treatments of"):
            return "Lobular Carcinoma in Situ"
        return None

    trace2 = zeqr.reformulate(Q4, ctx, idf, reader)
    assert trace2.q_double_star == expected
    assert trace2.coref_steps[0].answer.score == pytest.approx(0.9)
    assert asked[0].startswith("What is that refer to")

    def broken(question, context):
        raise ValueError("model crashed")

    with pytest.raises(ValueError):
        zeqr.reformulate(Q4, ctx, idf, broken)


def test_search_and_evaluate():
    docs = zeqr.load_collection(str(BENCH / "collection.jsonl"))
    assert len(docs) == 20
    index = zeqr.build_index(docs)
    run = zeqr.bm25_search(index, "treatments of Lobular Carcinoma in Situ", k=5, query_id="1_4")
    assert len(run.ranked) == 5
    assert [d.score for d in run.ranked] == sorted((d.score for d in run.ranked), reverse=True)
    report = zeqr.evaluate_run([run], {"1_4": {"d06": 2, "d07": 2}})
    assert report.num_queries == 1
    assert 0.0 < report.means.ndcg_at_5 <= 1.0

    perfect = zeqr.RunResult("q", [zeqr.ScoredDoc("a", 2.0), zeqr.ScoredDoc("b", 1.0)])
    assert zeqr.evaluate_run([perfect], {"q": {"a": 1}}).per_query["q"].ndcg_at_5 == 1.0
    empty = zeqr.evaluate_run([perfect], {})
    assert math.isnan(empty.means.ndcg_at_5)


def test_t_test_and_census():
    t = zeqr.paired_t_test([2, 3, 4, 5, 6], [1, 1, 1, 1, 1])
    assert t.t_statistic == pytest.approx(4.2426, abs=1e-4)
    assert t.p_value == pytest.approx(0.0132, abs=1e-3)
    with pytest.raises(zeqr.PreconditionError):
        zeqr.paired_t_test([1.0], [2.0])

    sessions = zeqr.load_topics(str(BENCH / "topics.json"))
    docs = zeqr.load_collection(str(BENCH / "collection.jsonl"))
    config = zeqr.Config()
    config.idf_threshold = 1.5
    census = zeqr.ambiguity_census(sessions, zeqr.build_idf_table(docs), config)
    assert (census.coreference_count, census.omission_count) == (4, 6)
