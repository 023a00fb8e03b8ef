"""Shared fixtures: corpora, trained artifacts, and the acceptance summary."""

from __future__ import annotations

from pathlib import Path

import pytest

from verigrag.encoder import ContrastiveGraphEncoder
from verigrag.netlist import VerilogSource, extract_corpus, parse_verilog
from verigrag.retrieval import CrossAttentionTeacher, DistilledDualEncoder
from verigrag.toydata import generate_toy_corpus
from verigrag.veriformer import VeriFormerStage1, VeriFormerStage2, train_lm

FLIP_FLOP_SRC = """\
// D flip-flop
module flip_flop (clk, d, q);
  input clk, d;
  output reg q;
  always @(posedge clk) begin
    q <= d;
  end
endmodule
"""


@pytest.fixture(scope="session")
def flip_flop_source():
    return VerilogSource.from_text(FLIP_FLOP_SRC, "flip_flop.v")


@pytest.fixture(scope="session")
def flip_flop_graph(flip_flop_source):
    from verigrag.netlist import elaborate_to_graph
    ast = parse_verilog(flip_flop_source)[0]
    return elaborate_to_graph(ast, 1, source_sha256=flip_flop_source.sha256)


@pytest.fixture(scope="session")
def toy_corpus_dir(tmp_path_factory):
    """32 structurally distinct modules with description sidecars."""
    root = tmp_path_factory.mktemp("toy32")
    generate_toy_corpus(root, count=32, seed=0)
    return root


@pytest.fixture(scope="session")
def toy_graphs(toy_corpus_dir):
    return extract_corpus(toy_corpus_dir, apply_dedup=False).graphs


@pytest.fixture(scope="session")
def toy64(tmp_path_factory):
    """64-module corpus with (graph, description, code) lookups."""
    root = tmp_path_factory.mktemp("toy64")
    generate_toy_corpus(root, count=64, seed=7)
    graphs = extract_corpus(root, apply_dedup=False).graphs
    descriptions = {p.stem: p.read_text(encoding="utf-8").strip()
                    for p in Path(root).glob("*.txt")}
    codes = {p.stem: p.read_text(encoding="utf-8")
             for p in Path(root).glob("*.v")}
    return {"dir": root, "graphs": graphs, "descriptions": descriptions,
            "codes": codes}


@pytest.fixture(scope="session")
def trained_encoder(toy_graphs):
    """The acceptance-schedule encoder: 50 epochs on the 32-graph corpus."""
    return ContrastiveGraphEncoder(epochs=50, batch_size=8, seed=0).fit(
        toy_graphs)


@pytest.fixture(scope="session")
def retriever_pairs(toy64, trained_encoder):
    """(description, graph embedding) pairs for the 64-module corpus."""
    graphs = toy64["graphs"]
    z = trained_encoder.transform(graphs)
    return [(toy64["descriptions"][g.module_name], z[i])
            for i, g in enumerate(graphs)]


@pytest.fixture(scope="session")
def trained_teacher(retriever_pairs):
    return CrossAttentionTeacher(seed=0).fit(retriever_pairs)


@pytest.fixture(scope="session")
def trained_student(retriever_pairs, trained_teacher):
    return DistilledDualEncoder(teacher=trained_teacher, mse_weight=1.0,
                                seed=0).fit(retriever_pairs)


@pytest.fixture(scope="session")
def stage1_pairs(toy64, trained_encoder):
    graphs = toy64["graphs"]
    z = trained_encoder.transform(graphs)
    return [(z[i], toy64["codes"][g.module_name])
            for i, g in enumerate(graphs)]


@pytest.fixture(scope="session")
def stage1_model(stage1_pairs):
    return VeriFormerStage1(epochs=40, seed=0).fit(stage1_pairs)


@pytest.fixture(scope="session")
def tiny_lm(toy64):
    samples = [(toy64["descriptions"][g.module_name],
                toy64["codes"][g.module_name]) for g in toy64["graphs"]]
    return train_lm(samples, epochs=25, seed=0)


@pytest.fixture(scope="session")
def stage2_samples(toy64, trained_encoder):
    graphs = toy64["graphs"]
    z = trained_encoder.transform(graphs)
    return [(toy64["descriptions"][g.module_name], z[i],
             toy64["codes"][g.module_name]) for i, g in enumerate(graphs)]


@pytest.fixture(scope="session")
def stage2_model(stage2_samples, stage1_model, tiny_lm):
    return VeriFormerStage2(stage1=stage1_model, lm=tiny_lm, alpha=0.1,
                            epochs=6, seed=0).fit(stage2_samples)


# --- acceptance summary: one PASS/FAIL line per criterion -------------------

_ACCEPTANCE_RESULTS: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        name = report.nodeid.split("::")[-1]
        outcome = "PASS" if report.passed else (
            "SKIP" if report.skipped else "FAIL")
        _ACCEPTANCE_RESULTS[name] = outcome


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, outcome in sorted(_ACCEPTANCE_RESULTS.items()):
        terminalreporter.write_line(f"[{outcome}] {name}")
