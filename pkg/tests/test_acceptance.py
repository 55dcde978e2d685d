"""Acceptance suite: one test per criterion, one PASS line per criterion.

Run with ``pytest tests/test_acceptance.py -v -s``.  Criteria, in order:

1. The running example classifies with order type (1,1) and its two
   critical branches match the published tree annotations, under 1 s.
2. 1000 generated skeletal inequalities all reduce successfully, under 60 s.
3. Corpus plus 100 generated inputs agree with their pure outputs on all
   530 frames with up to 3 worlds, zero disagreements, under 5 min.
4. The valid-frame sets of the box-reflexivity, transitivity, and
   diamond-reflexivity outputs are exactly the expected frame classes.
5. Translation equivalence: exhaustive on two-world models for corpus
   outputs, 1000 random three-world models for generated outputs.
6. Every axiom and derived-theorem schema is valid on all models with up
   to 3 worlds.
7. Engine invariants across all runs: the system shape after every trace
   step, freshness of introduced nominals, deterministic trace replay.
"""

import json
import random
import time

from hybridcorr.alba import apply_step, has_system_shape, replay, run
from hybridcorr.axioms import check_schemas
from hybridcorr.classify import (
    OrderType,
    Pol,
    find_order_type,
    inequality_critical_branches,
)
from hybridcorr.corpus import CORPUS
from hybridcorr.generate import GeneratorConfig, SkeletalGenerator
from hybridcorr.semantics import (
    EnumerationLimits,
    enumerate_frames,
    frame_valid,
    frame_valid_quasi_set,
    globally_true,
    holds_inequality,
    holds_quasi,
    is_reflexive,
    is_transitive,
    random_model,
)
from hybridcorr.syntax import (
    Down,
    Implies,
    all_symbols,
    nominals,
    parse,
    parse_inequality,
    prop,
    subformulas,
)
from hybridcorr.translate import tr_ineq, tr_quasi

from strategies import all_models_for_item

LIMITS = EnumerationLimits(max_worlds=3, max_props=3, max_nominals=12, max_count=50_000_000)

_cache: dict = {}


def all_frames():
    if "frames" not in _cache:
        _cache["frames"] = list(enumerate_frames(3, LIMITS))
    return _cache["frames"]


def corpus_runs():
    """Classification + reduction for every skeletal corpus entry."""
    if "corpus" not in _cache:
        out = {}
        for entry in CORPUS:
            if not entry.expect_skeletal:
                continue
            result = run(entry.formula())
            assert result.ok, f"corpus entry {entry.name} did not reduce"
            out[entry.name] = (entry, result)
        _cache["corpus"] = out
    return _cache["corpus"]


def generated_success_runs():
    if "gen1000" not in _cache:
        gen = SkeletalGenerator(seed=42)  # depth <= 5, <= 3 variables
        t0 = time.monotonic()
        runs = []
        for _ in range(1000):
            ineq, eps = gen.inequality()
            runs.append((ineq, eps, run(ineq, eps_hint=eps)))
        _cache["gen1000"] = (runs, time.monotonic() - t0)
    return _cache["gen1000"]


def generated_oracle_runs():
    if "gen100" not in _cache:
        cfg = GeneratorConfig(max_depth=4, max_props=2, max_nominals=1, filler_depth=2)
        gen = SkeletalGenerator(seed=7, config=cfg)
        runs = []
        for _ in range(100):
            ineq, eps = gen.inequality()
            runs.append((ineq, eps, run(ineq, eps_hint=eps)))
        _cache["gen100"] = runs
    return _cache["gen100"]


def test_criterion_1_running_example_classification():
    t0 = time.monotonic()
    ineq = parse_inequality("<>p1 & p2 <= <>[]<>p1 | <>[]<>p2")
    eps = find_order_type(ineq)
    assert eps == OrderType(((prop("p1"), Pol.ONE), (prop("p2"), Pol.ONE)))
    branches = inequality_critical_branches(ineq, eps)
    assert [b.node_texts() for b in branches] == [
        ["+p1", "+dia", "+and"],
        ["+p2", "+and"],
    ]
    assert all(b.is_skeletal() for b in branches)
    elapsed = time.monotonic() - t0
    assert elapsed < 1.0, f"classification took {elapsed:.2f}s"
    print(f"\nACCEPTANCE 1 (running-example fidelity): PASS ({elapsed*1000:.0f} ms)")


def test_criterion_2_success_theorem():
    runs, elapsed = generated_success_runs()
    failures = [ineq for ineq, _, result in runs if not result.ok]
    assert not failures, failures[:3]
    assert len(runs) == 1000
    assert elapsed < 60.0, f"1000 reductions took {elapsed:.1f}s"
    print(f"\nACCEPTANCE 2 (success theorem, 1000/1000): PASS ({elapsed:.1f} s)")


def test_criterion_3_frame_soundness():
    t0 = time.monotonic()
    frames = all_frames()
    assert len(frames) == 530

    entries = corpus_runs()
    binder_entries = [
        name
        for name, (entry, _) in entries.items()
        if any(isinstance(g, Down) for g in subformulas(entry.inequality().lhs))
        or any(isinstance(g, Down) for g in subformulas(entry.inequality().rhs))
    ]
    assert len(entries) >= 12
    assert len(binder_entries) >= 3
    for required in ("refl-box", "refl-dia", "trans", "join-split"):
        assert required in entries

    disagreements = []
    for name, (entry, result) in entries.items():
        ineq = entry.inequality()
        f = Implies(ineq.lhs, ineq.rhs)
        for fr in frames:
            if frame_valid(fr, f, LIMITS) != frame_valid_quasi_set(fr, result.quasis, LIMITS):
                disagreements.append((name, fr))
    for ineq, eps, result in generated_oracle_runs():
        f = Implies(ineq.lhs, ineq.rhs)
        for fr in frames:
            if frame_valid(fr, f, LIMITS) != frame_valid_quasi_set(fr, result.quasis, LIMITS):
                disagreements.append((str(ineq), fr))
    assert disagreements == [], disagreements[:3]
    elapsed = time.monotonic() - t0
    assert elapsed < 300.0, f"soundness sweep took {elapsed:.1f}s"
    print(f"\nACCEPTANCE 3 (frame soundness, 530 frames): PASS ({elapsed:.1f} s)")


def test_criterion_4_known_correspondents():
    frames = all_frames()
    reflexive = [fr for fr in frames if is_reflexive(fr)]
    transitive = [fr for fr in frames if is_transitive(fr)]

    out_box = run(parse("[]p -> p"))
    out_trans = run(parse("<> <> p -> <> p"))
    out_dia = run(parse("p -> <>p"))
    assert out_box.ok and out_trans.ok and out_dia.ok

    def valid_set(result):
        return [fr for fr in frames if frame_valid_quasi_set(fr, result.quasis, LIMITS)]

    assert valid_set(out_box) == reflexive
    assert valid_set(out_trans) == transitive
    assert valid_set(out_dia) == reflexive
    print("\nACCEPTANCE 4 (known correspondents exact): PASS")


def test_criterion_5_translation_equivalence():
    mismatches = 0
    # corpus outputs: every model with up to 2 worlds, exhaustively
    for name, (entry, result) in corpus_runs().items():
        for quasi in result.quasis:
            for m, g in all_models_for_item(quasi, max_worlds=2):
                if holds_quasi(m, g, quasi) != globally_true(m, g, tr_quasi(quasi)):
                    mismatches += 1
            for ineq in quasi.antecedents:
                for m, g in all_models_for_item(ineq, max_worlds=2):
                    if holds_inequality(m, g, ineq) != globally_true(m, g, tr_ineq(ineq)):
                        mismatches += 1
    assert mismatches == 0

    # generated outputs: 1000 random models with up to 3 worlds
    pairs = []
    for ineq, eps, result in generated_oracle_runs():
        pairs.extend(result.quasis)
    rng = random.Random(99)
    checked = 0
    while checked < 1000:
        quasi = pairs[checked % len(pairs)]
        ns = set()
        for i in (*quasi.antecedents, quasi.conclusion):
            ns |= nominals(i.lhs) | nominals(i.rhs)
        m = random_model(rng, [], sorted(ns, key=str), max_worlds=3)
        if holds_quasi(m, {}, quasi) != globally_true(m, {}, tr_quasi(quasi)):
            mismatches += 1
        checked += 1
    assert checked == 1000 and mismatches == 0
    print("\nACCEPTANCE 5 (translation equivalence): PASS")


def test_criterion_6_schema_validity():
    checks = check_schemas(3)
    failing = [c for c in checks if not c.ok]
    assert failing == [], [(c.name, c.failures[:1]) for c in failing]
    total = sum(c.instances for c in checks)
    print(f"\nACCEPTANCE 6 (schema validity, {len(checks)} schemas / {total} instances): PASS")


def _validate_trace_invariants(trace):
    """Shape after every stage-2 step; nominal freshness at introduction."""
    state = trace.initial
    in_system = trace.origin != "preprocess"
    anchored = False
    for step in trace.steps:
        pre_names = {
            (s.kind, s.name)
            for i in state
            for s in all_symbols(i.lhs) | all_symbols(i.rhs)
        }
        new_state = apply_step(state, step)
        if step.rule == "first-approx":
            anchored = True
        if in_system and anchored:
            for i in new_state:
                assert has_system_shape(i), (trace.origin, step.rule, str(i))
        if step.rule.startswith(("approx-dia", "approx-box", "approx-implies", "first-approx", "name-svar")):
            produced_names = {
                (s.kind, s.name)
                for i in step.produced
                for s in all_symbols(i.lhs) | all_symbols(i.rhs)
            }
            consumed_names = {
                (s.kind, s.name)
                for i in step.consumed
                for s in all_symbols(i.lhs) | all_symbols(i.rhs)
            }
            introduced = produced_names - consumed_names
            assert not (introduced & pre_names), (step.rule, introduced & pre_names)
        state = new_state
    assert state == trace.final


def test_criterion_7_engine_invariants():
    runs, _ = generated_success_runs()
    traced = 0
    for ineq, eps, result in runs:
        for trace in result.traces:
            _validate_trace_invariants(trace)
            assert replay(trace) == trace.final
            traced += 1
    for ineq, eps, result in generated_oracle_runs():
        for trace in result.traces:
            _validate_trace_invariants(trace)
            traced += 1

    # determinism: re-running a fixed-seed batch reproduces traces byte for byte
    def snapshot():
        gen = SkeletalGenerator(seed=123)
        payload = []
        for _ in range(25):
            ineq, eps = gen.inequality()
            result = run(ineq, eps_hint=eps)
            payload.append([t.to_json() for t in result.traces])
        return json.dumps(payload, sort_keys=True)

    assert snapshot() == snapshot()
    print(f"\nACCEPTANCE 7 (engine invariants over {traced} traces): PASS")
