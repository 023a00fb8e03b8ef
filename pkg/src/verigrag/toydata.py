"""Synthetic desk-scale corpora: small Verilog modules with descriptions.

Used by the test suite and the README quickstart to exercise the full
pipeline without external datasets. Generation is deterministic per seed;
each module gets a sidecar ``<name>.txt`` natural-language description.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

_A_NAMES = ["a", "x", "p", "lhs", "in0", "da"]
_B_NAMES = ["b", "y_in", "q_in", "rhs", "in1", "db"]
_Y_NAMES = ["y", "out", "res", "dout", "z", "f"]
_CLK_NAMES = ["clk", "clock", "ck"]

_KINDS = ["and", "or", "xor", "add", "sub", "inv", "mux", "eq",
          "dff", "counter", "concat", "enreg"]

_OP_PHRASES = {
    "and": "bitwise and gate combining {a} with {b}",
    "or": "bitwise or gate combining {a} with {b}",
    "xor": "bitwise xor gate combining {a} with {b}",
    "add": "adder computing the sum of {a} and {b}",
    "sub": "subtractor computing {a} minus {b}",
    "inv": "inverter negating every bit of {a}",
    "mux": "two to one multiplexer choosing {a} or {b} with select {s}",
    "eq": "equality comparator raising {y} when {a} equals {b}",
    "dff": "d flip flop capturing {a} on the rising edge of {c}",
    "counter": "counter register incrementing by one on each rising edge of {c}",
    "concat": "concatenation joining {a} and {b} into one bus",
    "enreg": "enabled register loading {a} when {s} is high on the {c} edge",
}


def make_toy_module(kind: str, width: int, rng: np.random.Generator,
                    index: int) -> tuple[str, str, str]:
    """Return (module_name, verilog_source, description) for one template."""
    a = _A_NAMES[rng.integers(len(_A_NAMES))]
    b = _B_NAMES[rng.integers(len(_B_NAMES))]
    y = _Y_NAMES[rng.integers(len(_Y_NAMES))]
    clk = _CLK_NAMES[rng.integers(len(_CLK_NAMES))]
    sel = "sel" if rng.integers(2) == 0 else "en"
    name = f"{kind}{width}_u{index:03d}"
    r = f"[{width - 1}:0] " if width > 1 else ""

    if kind in ("and", "or", "xor", "add", "sub"):
        op = {"and": "&", "or": "|", "xor": "^", "add": "+", "sub": "-"}[kind]
        src = (f"module {name}(input {r}{a}, input {r}{b}, output {r}{y});\n"
               f"  assign {y} = {a} {op} {b};\nendmodule\n")
    elif kind == "inv":
        src = (f"module {name}(input {r}{a}, output {r}{y});\n"
               f"  assign {y} = ~{a};\nendmodule\n")
    elif kind == "mux":
        src = (f"module {name}(input {sel}, input {r}{a}, input {r}{b}, "
               f"output {r}{y});\n"
               f"  assign {y} = {sel} ? {a} : {b};\nendmodule\n")
    elif kind == "eq":
        src = (f"module {name}(input {r}{a}, input {r}{b}, output {y});\n"
               f"  assign {y} = {a} == {b};\nendmodule\n")
    elif kind == "dff":
        src = (f"module {name}(input {clk}, input {r}{a}, output reg {r}{y});\n"
               f"  always @(posedge {clk}) {y} <= {a};\nendmodule\n")
    elif kind == "counter":
        src = (f"module {name}(input {clk}, output reg {r}{y});\n"
               f"  always @(posedge {clk}) {y} <= {y} + 1;\nendmodule\n")
    elif kind == "concat":
        src = (f"module {name}(input {r}{a}, input {r}{b}, "
               f"output [{2 * width - 1}:0] {y});\n"
               f"  assign {y} = {{{a}, {b}}};\nendmodule\n")
    elif kind == "enreg":
        src = (f"module {name}(input {clk}, input {sel}, input {r}{a}, "
               f"output reg {r}{y});\n"
               f"  always @(posedge {clk}) {y} <= {sel} ? {a} : {y};\n"
               f"endmodule\n")
    else:
        raise ValueError(f"unknown template kind {kind!r}")

    phrase = _OP_PHRASES[kind].format(a=a, b=b, y=y, c=clk, s=sel)
    description = f"a {width} bit {phrase}"
    return name, src, description


# templates grouped by graph topology; two modules drawn from different
# groups (or the same group at different widths) elaborate to distinct graphs
_TOPOLOGY_GROUPS = [
    ["and", "or", "xor", "add", "sub"],
    ["inv"],
    ["mux"],
    ["eq"],
    ["dff"],
    ["counter"],
    ["concat"],
    ["enreg"],
]

_WIDTHS = [1, 2, 3, 4, 6, 8, 12, 16, 20, 24, 28, 32]


def generate_toy_corpus(out_dir, count: int = 32, seed: int = 0) -> list[str]:
    """Write ``count`` structurally distinct modules plus description sidecars.

    Each module occupies a unique (topology group, width) cell so corpus
    graphs are separable by structure alone; returns module names.
    """
    rng = np.random.default_rng(seed)
    needs_multibit = {"mux", "enreg", "eq", "concat"}
    combos = [(gi, w) for gi, group in enumerate(_TOPOLOGY_GROUPS)
              for w in _WIDTHS if not (w == 1 and group[0] in needs_multibit)]
    if count > len(combos):
        raise ValueError(f"at most {len(combos)} structurally distinct modules")
    order = rng.permutation(len(combos))[:count]
    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)
    names = []
    for i, ci in enumerate(order):
        gi, width = combos[ci]
        group = _TOPOLOGY_GROUPS[gi]
        kind = group[rng.integers(len(group))]
        name, src, desc = make_toy_module(kind, width, rng, i)
        (root / f"{name}.v").write_text(src, encoding="utf-8")
        (root / f"{name}.txt").write_text(desc + "\n", encoding="utf-8")
        names.append(name)
    return names


def write_benchmark_tasks(bench_dir, corpus_dir, task_names: list[str],
                          timeout_s: int = 20) -> None:
    """Create benchmark task directories backed by the bundled syntax checker.

    The functional check greps the candidate for the structural keyword the
    task demands, standing in for a simulator at desk scale.
    """
    bench = Path(bench_dir)
    corpus = Path(corpus_dir)
    for name in task_names:
        desc = (corpus / f"{name}.txt").read_text(encoding="utf-8").strip()
        tdir = bench / name
        tdir.mkdir(parents=True, exist_ok=True)
        (tdir / "description.txt").write_text(desc + "\n", encoding="utf-8")
        (tdir / "check_syntax.cmd").write_text(
            "verigrag check-syntax {code_file}\n", encoding="utf-8")
        keyword = "always" if ("flop" in desc or "register" in desc
                               or "counter" in desc) else "assign"
        (tdir / "check_function.cmd").write_text(
            f"grep -q {keyword} {{code_file}}\n", encoding="utf-8")
        (tdir / "meta.json").write_text(
            json.dumps({"timeout_s": timeout_s}) + "\n", encoding="utf-8")
