from procause.causal.discover import search_pag
from procause.ingest import emit_xes
from procause.jsonio import canonical_dumps
from procause.sem import fit_sem
from procause.situation import SituationTable, extract_table, trace_feature
from procause.synthgen import (
    GroundTruthSpec,
    generate_log,
    hidden_sidecar_rows,
    it_company_knowledge,
    it_company_plan,
    it_company_spec,
    random_ground_truth,
)

TRUE_COEFFICIENTS = {
    ("Trace,Complexity", "Product backlog,Duration"): 10.0,
    ("Trace,Complexity", "Team charter,TeamSize"): 5.0,
    ("Business case development,Priority", "Team charter,TeamSize"): 3.0,
    ("Trace,Complexity", "Trace,ImplementationPhaseDuration"): 50.0,
    ("Team charter,TeamSize", "Trace,ImplementationPhaseDuration"): 5.0,
}


def test_same_seed_byte_identical():
    a, _ = generate_log(it_company_spec(50, seed=3))
    b, _ = generate_log(it_company_spec(50, seed=3))
    assert emit_xes(a) == emit_xes(b)
    assert canonical_dumps(a.to_dict()) == canonical_dumps(b.to_dict())


def test_different_seed_differs():
    a, _ = generate_log(it_company_spec(50, seed=3))
    b, _ = generate_log(it_company_spec(50, seed=4))
    assert emit_xes(a) != emit_xes(b)


def test_zero_traces():
    log, hidden = generate_log(it_company_spec(0, seed=1))
    assert log.traces == [] and hidden == {}


def test_single_linear_variant_without_rework():
    log, _ = generate_log(it_company_spec(40, seed=2))
    variants = {tuple(e.activity for e in t.events) for t in log.traces}
    assert len(variants) == 1
    (variant,) = variants
    assert variant == (
        "Business case development",
        "Feasibility study",
        "Product backlog",
        "Team charter",
        "Development",
        "Test",
        "Release",
    )


def test_rework_probability_adds_variant():
    log, _ = generate_log(it_company_spec(200, seed=2, rework_probability=0.3))
    lengths = {len(t.events) for t in log.traces}
    assert lengths == {7, 10}


def test_timestamps_strictly_increase_within_trace():
    log, _ = generate_log(it_company_spec(10, seed=6))
    for trace in log.traces:
        stamps = [e.timestamp for e in trace.events]
        assert all(a < b for a, b in zip(stamps, stamps[1:]))


def test_hidden_complexity_not_in_log_but_in_sidecar():
    log, hidden = generate_log(it_company_spec(20, seed=5))
    assert "Complexity" not in log.schema
    assert set(hidden) == set(log.case_ids())
    assert all("Complexity" in vals for vals in hidden.values())


def test_reveal_hidden_writes_trace_attribute():
    log, hidden = generate_log(it_company_spec(20, seed=5, reveal_hidden=True))
    assert all(t.attrs.get("Complexity") is not None for t in log.traces)
    assert all(vals == {} for vals in hidden.values())


def test_feature_stamped_on_carrier_activity():
    log, _ = generate_log(it_company_spec(5, seed=8))
    for trace in log.traces:
        for ev in trace.events:
            if ev.activity == "Team charter":
                assert ev.attrs.get("TeamSize") is not None
            else:
                assert "TeamSize" not in ev.attrs


def test_refit_recovers_spec_coefficients():
    spec = it_company_spec(1000, seed=12, reveal_hidden=True)
    log, _ = generate_log(spec)
    table = extract_table(log, it_company_plan(spec))
    sem = fit_sem(table, spec.structure())
    for (parent, child), want in TRUE_COEFFICIENTS.items():
        got = sem.equation(child).coefficient(parent)
        assert abs(got - want) <= 0.1 * want


def test_sidecar_join_recovers_hidden_coefficients():
    # complexity hidden in the log; the sidecar joins back by caseID
    spec = it_company_spec(1000, seed=13)
    log, hidden = generate_log(spec)
    table = extract_table(log, it_company_plan(spec))
    complexity = trace_feature("Complexity")
    plan = type(table.plan)((complexity,) + table.plan.features, table.plan.class_feature)
    situations_order = sorted(log.case_ids(), key=str)
    rows = [
        [hidden[case]["Complexity"]] + row
        for case, row in zip(situations_order, table.rows)
    ]
    types = {complexity.label: "numeric", **table.column_types}
    joined = SituationTable(plan, rows, types)
    spec_visible = it_company_spec(1000, seed=13, reveal_hidden=True)
    sem = fit_sem(joined, spec_visible.structure())
    for (parent, child), want in TRUE_COEFFICIENTS.items():
        got = sem.equation(child).coefficient(parent)
        assert abs(got - want) <= 0.1 * want


def test_sidecar_rows_layout():
    _, hidden = generate_log(it_company_spec(3, seed=1))
    rows = hidden_sidecar_rows(hidden)
    assert rows[0] == ["caseID", "Complexity"]
    assert len(rows) == 4


def test_spec_round_trip():
    spec = it_company_spec(10, seed=9, rework_probability=0.25)
    again = GroundTruthSpec.from_dict(spec.to_dict())
    assert again == spec


def test_builtin_knowledge_forbids_reverse_time():
    spec = it_company_spec(10, seed=1, reveal_hidden=True)
    knowledge = it_company_knowledge(spec)
    assert (
        "Trace,ImplementationPhaseDuration",
        "Trace,Complexity",
    ) in knowledge.forbidden
    assert not knowledge.required


# --- random ground truths -----------------------------------------------------


def test_random_spec_no_edges():
    spec = random_ground_truth(3, 0.0, seed=4)
    assert all(f.parents == () for f in spec.features)


def test_random_spec_complete_dag():
    spec = random_ground_truth(6, 1.0, seed=4)
    assert sum(len(f.parents) for f in spec.features) == 15
    spec.structure()  # acyclic by construction


def test_random_spec_coefficient_range():
    for seed in range(20):
        spec = random_ground_truth(5, 0.7, seed=seed)
        for f in spec.features:
            for _, w in f.parents:
                assert 0.5 <= abs(w) <= 3.0


def test_oracle_search_recovers_random_skeletons():
    for seed in range(100):
        spec = random_ground_truth(int(3 + seed % 4), 0.5, seed=seed)
        dag = spec.structure()
        pag, _ = search_pag(
            dag.vertices, lambda x, y, c: dag.d_separated(x, y, c)
        )
        got = {frozenset((a, b)) for a, b, _, _ in pag.edges()}
        want = {frozenset(e) for e in dag.edges}
        assert got == want, f"seed {seed}"
