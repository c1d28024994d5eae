"""Critérios de aceitação em nível de benchmark sobre o log sintético de sinistros"""
from pathlib import Path

import pytest

from src.models.config import BenchConfig, BenchFormula
from src.models.entities import Strategy
from src.services.bench import BenchRunner

FORMULAS_DIR = Path(__file__).parent.parent / "formulas"
CONSTRAINED = (Strategy.MAR.value, Strategy.APRIORI.value, Strategy.ONLINE.value)

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def bench_rows():
    """Fixture que executa a grade completa: 3 fórmulas x 5 estratégias, prefixo 10"""
    config = BenchConfig(
        num_cases=4800,
        log_seed=42,
        formulas=[
            BenchFormula(id=name, path=FORMULAS_DIR / f"{name}.ltl")
            for name in ("claim_10", "claim_25", "claim_50")
        ],
        prefix_lengths=[10],
        queries=15,
        seed=42,
    )
    return BenchRunner(config, show_progress=False).run()


def test_grid_is_complete(bench_rows):
    """Testa uma linha por célula, sem falhas"""
    assert len(bench_rows) == 15
    assert all("error" not in row for row in bench_rows)
    coverages = {row["formula_id"]: row["coverage"] for row in bench_rows}
    assert coverages["claim_10"] < coverages["claim_25"] < coverages["claim_50"]


def test_constrained_strategies_always_comply(bench_rows):
    """Testa compliance média 1.0 para MAR, APriori e Online"""
    for row in bench_rows:
        if row["strategy"] in CONSTRAINED:
            assert row["compliance"] == 1.0, row


def test_hit_rate(bench_rows):
    """Testa a taxa de acerto das estratégias restritas"""
    for row in bench_rows:
        if row["strategy"] in CONSTRAINED:
            assert row["hit_rate"] >= 0.9, row


def test_gen_compliance_is_not_above_constrained(bench_rows):
    """Testa compliance(Gen) <= compliance de cada estratégia restrita"""
    for formula_id in ("claim_10", "claim_25", "claim_50"):
        cells = {r["strategy"]: r for r in bench_rows if r["formula_id"] == formula_id}
        gen = cells[Strategy.GEN.value]["compliance"]
        for strategy in CONSTRAINED:
            assert gen <= cells[strategy]["compliance"]


def test_apriori_sparsity_not_above_genphi(bench_rows):
    """Testa esparsidade média APriori <= GenPhi na fórmula de cobertura 50%"""
    cells = {r["strategy"]: r for r in bench_rows if r["formula_id"] == "claim_50"}
    assert cells[Strategy.APRIORI.value]["sparsity"] <= cells[Strategy.GEN_PHI.value]["sparsity"]
