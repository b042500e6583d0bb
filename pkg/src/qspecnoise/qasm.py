"""OpenQASM 2 export of the basis-transfer / convection circuit."""

from __future__ import annotations

from .field import ProblemSpec
from .quantum import layer


def _angle(a: float) -> str:
    return format(float(a), ".17g")


def export_qasm(spec: ProblemSpec, l: int, basis_state: int | None = None, measure: bool = True) -> str:
    """Circuit text: optional Ry(pi) preparation, ``l`` Rz layers separated by barriers, measurement.

    Barriers keep a transpiler from fusing consecutive layers, so the emitted
    depth is exactly ``l``.  The per-layer global phase is not observable and
    only recorded as a comment.
    """
    if l < 1:
        raise ValueError("need at least one layer")
    n = spec.n
    lay = layer(spec)
    lines = [
        "OPENQASM 2.0;",
        'include "qelib1.inc";',
        f"// convection layers: N={spec.N} L={_angle(spec.L)} c={_angle(spec.c)} dt={_angle(spec.dt)} l={l}",
        f"// global phase per layer: {_angle(lay.global_phase)}",
        f"qreg q[{n}];",
        f"creg c[{n}];",
    ]
    if basis_state is not None:
        if not 0 <= basis_state < 1 << n:
            raise ValueError(f"basis state {basis_state} outside 0..{(1 << n) - 1}")
        lines += [f"ry(pi) q[{q}];" for q in range(n) if basis_state >> q & 1]
    body = [f"rz({_angle(theta)}) q[{q}];" for q, theta in enumerate(lay.angles)]
    for i in range(l):
        if i:
            lines.append("barrier q;")
        lines += body
    if measure:
        lines += [f"measure q[{q}] -> c[{q}];" for q in range(n)]
    return "\n".join(lines) + "\n"
