"""Command-line front end.

Every subcommand prints a JSON object on stdout; arrays go to CSV and
images to PGM when a path is given.  Flag errors exit with status 2,
engine errors with status 1 and the error class name on stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import automaton, bosonic, fermions, spin, susy, target
from .errors import QCAError
from .lattice import ComplexAmp, LatticeShape


def write_atomic(path: str, data) -> None:
    """Write via a temporary file in the target directory, then rename."""
    if isinstance(data, str):
        data = data.encode()
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _amp(z) -> dict:
    return (z if isinstance(z, ComplexAmp) else ComplexAmp.from_complex(z)).to_json()


def _floats(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text: str) -> list:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _emit(obj: dict) -> None:
    sys.stdout.write(json.dumps(obj, indent=2) + "\n")


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


# evolve


def _initial_rows(args, rule: automaton.RuleSpec):
    m = args.m
    rng = np.random.default_rng(args.seed)
    if rule.kind == "spin":
        up = np.tile([0.0, 0.0, 1.0], (m, 1))
        if args.init == "zero":
            return up, None
        if args.init == "bump":
            up[m // 2] = [1.0, 0.0, 0.0]
            return up, None
        if args.init == "random":
            v = rng.normal(size=(m, 3))
            return v / np.linalg.norm(v, axis=1, keepdims=True), None
        vals = _floats(args.init)
        if len(vals) != 3 * m:
            raise argparse.ArgumentTypeError("spin --init needs 3*M values")
        return np.array(vals).reshape(m, 3), None
    if args.init == "zero":
        return np.zeros(m, dtype=np.int64), np.zeros(m, dtype=np.int64)
    if args.init == "bump":
        row1 = np.zeros(m, dtype=np.int64)
        row1[m // 2] = 1
        return np.zeros(m, dtype=np.int64), row1
    if args.init == "random":
        if rule.modulus is not None:
            return rng.integers(0, rule.modulus, m), rng.integers(0, rule.modulus, m)
        return rng.normal(size=m), rng.normal(size=m)
    vals = _floats(args.init)
    if len(vals) != 2 * m:
        raise argparse.ArgumentTypeError("--init needs 2*M values (rows 0 and 1)")
    arr = np.array(vals)
    if np.all(arr == np.round(arr)) and rule.kind == "wave":
        arr = arr.astype(np.int64)
    return arr[:m], arr[m:]


def cmd_evolve(args) -> None:
    rule = automaton.RuleSpec(args.rule, w=args.w, b=tuple(args.b), coupling=args.coupling,
                              dt=args.dt, modulus=args.modulus)
    shape = LatticeShape(max(1, args.steps + 1), args.m, space_boundary=args.boundary)
    row0, row1 = _initial_rows(args, rule)
    hist = automaton.evolve(rule, row0, row1, args.steps, shape)
    csv_text = automaton.history_csv(hist)
    if args.csv:
        write_atomic(args.csv, csv_text)
    if args.pgm:
        write_atomic(args.pgm, automaton.render_pgm(hist))
    rows = hist.values
    back = automaton.reverse(rule, rows[-2], rows[-1], args.steps, shape)
    recovered = bool(np.array_equal(back.values[:2], rows[:2])) if rows.dtype.kind in "iu" else \
        float(np.max(np.abs(back.values[:2] - rows[:2])))
    out = {"rule": args.rule, "m": args.m, "steps": args.steps, "init": args.init,
           "rows": int(rows.shape[0]), "reverse_recovers": recovered}
    if not args.csv:
        out["history"] = csv_text.strip().split("\n")
    _emit(out)


# kernels


def cmd_kernel(args) -> None:
    kind = args.kind
    if kind == "ho":
        if args.phi is not None:
            params = bosonic.HOParams.from_phi(args.steps, args.phi)
        else:
            params = bosonic.HOParams(args.steps, args.w)
        closed = bosonic.kernel_ho_closed(params, args.x0, args.xn)
        out = {"kind": "ho", "steps": args.steps, "w": params.w, "x0": args.x0, "xn": args.xn,
               "closed": closed.to_json()}
        if args.oracle:
            orc = bosonic.kernel_ho_oracle(params, args.x0, args.xn)
            gauge = bosonic.gauge_phase(params, args.x0, args.xn)
            out["oracle"] = orc.to_json()
            out["gauge_residual"] = abs(complex(orc) / gauge - complex(closed)) / abs(complex(closed))
        _emit(out)
    elif kind == "mcell":
        row0, rown = np.array(args.row0), np.array(args.rown)
        if row0.shape != rown.shape:
            raise ValueError("boundary rows differ in length")
        k = bosonic.kernel_mcell(row0, rown, args.steps)
        out = {"kind": "mcell", "steps": args.steps, "row0": list(row0), "rown": list(rown),
               "modes": k.to_json()}
        if args.oracle:
            d = bosonic.kernel_mcell_direct(row0, rown, args.steps)
            g = bosonic.mcell_gauge_phase(row0, rown)
            out["direct"] = d.to_json()
            out["gauge_residual"] = abs(complex(d) / g - complex(k)) / abs(complex(k))
        _emit(out)
    elif kind == "walk":
        amp = target.walk_zk(args.k, args.xi, args.xf, args.t, args.m_max)
        mom = target.walk_zk_momentum(args.k, args.xi, args.xf, args.t)
        _emit({"kind": "walk", "k": args.k, "xi": args.xi, "xf": args.xf, "t": args.t,
               "amplitude": amp.to_json(), "momentum": mom.to_json(),
               "residual": abs(complex(amp) - complex(mom))})
    elif kind == "zk":
        amp = target.zk_amplitude(args.k, args.row0_int, args.rown_int, args.steps)
        _emit({"kind": "zk", "k": args.k, "steps": args.steps, "amplitude": amp.to_json()})
    elif kind == "ising":
        amp = target.ising_amplitude(args.row0_int, args.rown_int, args.steps)
        _emit({"kind": "ising", "steps": args.steps, "amplitude": amp.to_json()})


def cmd_doubling(args) -> None:
    zeros = fermions.doubler_census(args.r, args.dim, args.grid)
    _emit({"r": args.r, "dim": args.dim, "zeros": [list(z) if isinstance(z, tuple) else z for z in zeros]})


def cmd_grassmann(args) -> None:
    if args.kind == "det":
        rng = np.random.default_rng(args.seed)
        b = rng.normal(size=(args.n, args.n)) + 1j * rng.normal(size=(args.n, args.n))
        action = fermions.FermiAction(b)
        det = fermions.det_amplitude(action)
        brute = fermions.berezin_amplitude(action)
        _emit({"kind": "det", "n": args.n, "seed": args.seed, "det": det.to_json(),
               "berezin": brute.to_json(), "residual": abs(complex(det) - complex(brute))})
    else:
        action = fermions.fermi_action_quartic(args.steps, args.m, args.g)
        amp = fermions.quartic_amplitude(action)
        unit = fermions.fermi_action_quartic(args.steps, args.m, 1.0)
        h = 1e-4
        plus = complex(fermions.quartic_amplitude(fermions.fermi_action_quartic(args.steps, args.m, h)))
        minus = complex(fermions.quartic_amplitude(fermions.fermi_action_quartic(args.steps, args.m, -h)))
        fd = (plus - minus) / (2 * h)
        cof = fermions.quartic_first_order(unit)
        _emit({"kind": "quartic", "steps": args.steps, "m": args.m, "g": args.g,
               "amplitude": amp.to_json(), "d_dg_finite_difference": _amp(fd),
               "d_dg_cofactor": _amp(cof), "residual": abs(fd - cof)})


def cmd_susy_check(args) -> None:
    worst = susy.susy_check(args.cells, args.n, args.m, args.w, args.r, args.trials, args.seed)
    _emit({"cells": args.cells, "n": args.n, "m": args.m, "w": args.w, "r": args.r,
           "trials": args.trials, "seed": args.seed, "max_coeff": worst})


def cmd_clock_shift(args) -> None:
    u, v = susy.clock_shift(args.m)
    eye = np.eye(args.m)
    _emit({"m": args.m, "commutation_residual": susy.clock_shift_residual(args.m),
           "unitarity_residual": float(max(np.max(np.abs(u.conj().T @ u - eye)),
                                           np.max(np.abs(v.conj().T @ v - eye))))})


def _hamiltonian(args):
    if args.model == "heisenberg":
        return spin.heisenberg_h(args.m, (args.bx, args.by, args.bz), args.boundary)
    if args.model == "tfim":
        return spin.tfim_h(args.m, args.bz, args.gamma, args.boundary)
    if args.model == "fermionized":
        return spin.fermionized_tfim(args.m, args.bz, args.gamma, args.boundary,
                                     not args.drop_boundary_term)
    raise ValueError(f"no Hamiltonian for {args.model!r}")


def cmd_spectrum(args) -> None:
    if args.model == "bogoliubov":
        levels = spin.bogoliubov_spectrum(args.m, args.bz, args.gamma, args.boundary)
        out = {"model": "bogoliubov", "m": args.m, "bz": args.bz, "gamma": args.gamma,
               "boundary": args.boundary, "single_particle": [float(x) for x in levels],
               "ground_energy": spin.bogoliubov_ground_energy(args.m, args.bz, args.gamma, args.boundary)}
    else:
        levels = np.sort(spin.spectrum(_hamiltonian(args)))
        out = {"model": args.model, "m": args.m, "boundary": args.boundary,
               "energies": [float(x) for x in levels]}
    if args.csv:
        write_atomic(args.csv, "\n".join(_fmt(x) for x in levels) + "\n")
    _emit(out)


def cmd_propagate(args) -> None:
    h = _hamiltonian(args)
    bits = args.state if args.state is not None else [i % 2 for i in range(args.m)]
    if len(bits) != args.m:
        raise ValueError("--state needs one bit per site")
    psi0 = spin.basis_state(bits)
    psi = spin.propagate(h, psi0, args.t)
    e0 = float(np.real(np.vdot(psi0, h @ psi0)))
    e1 = float(np.real(np.vdot(psi, h @ psi)))
    if args.csv:
        write_atomic(args.csv, "".join(f"{_fmt(z.real)},{_fmt(z.imag)}\n" for z in psi))
    _emit({"model": args.model, "m": args.m, "t": args.t, "state": bits,
           "return_amplitude": _amp(np.vdot(psi0, psi)),
           "norm_drift": abs(float(np.linalg.norm(psi)) - 1.0), "energy_drift": abs(e1 - e0)})


def _load_schedule(path: str):
    with open(path) as fh:
        data = json.load(fh)
    m = int(data["sites"])
    segs = []
    for seg in data.get("segments", []):
        alpha = seg.get("alpha", [0.0] * m)
        beta = seg.get("beta", [0.0] * m)
        gamma = seg.get("gamma", [[0.0] * m for _ in range(m)])
        segs.append((seg["duration"], spin.SpinControl(alpha, beta, gamma)))
    return spin.ControlSchedule(tuple(segs), m)


def cmd_control(args) -> None:
    sched = _load_schedule(args.schedule)
    u = spin.control_unitary(sched, "spin")
    eye = np.eye(u.shape[0])
    out = {"sites": sched.sites, "segments": len(sched.segments),
           "unitarity_residual": float(np.max(np.abs(u.conj().T @ u - eye)))}
    if args.compare_fermionic:
        fsched = spin.ControlSchedule(tuple((d, spin.spin_to_fermion(c)) for d, c in sched.segments),
                                      sched.sites)
        uf = spin.control_unitary(fsched, "fermionic")
        out["fermionic_residual"] = float(np.max(np.abs(u - uf)))
    if args.csv:
        lines = [",".join(f"{_fmt(z.real)},{_fmt(z.imag)}" for z in row) for row in u]
        write_atomic(args.csv, "\n".join(lines) + "\n")
    _emit(out)


# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qca", allow_abbrev=False,
                                description="Quantized cellular automata engines.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, **kw):
        sp_ = sub.add_parser(name, allow_abbrev=False, **kw)
        sp_.set_defaults(func=fn)
        return sp_

    e = add("evolve", cmd_evolve, help="run a classical reversible automaton")
    e.add_argument("--rule", required=True, choices=automaton.KINDS)
    e.add_argument("--m", type=int, default=1)
    e.add_argument("--steps", type=int, required=True)
    e.add_argument("--init", default="zero", help="zero, bump, random or comma-separated values")
    e.add_argument("--w", type=float, default=0.0)
    e.add_argument("--b", type=_floats, default=[0.0, 0.0, 1.0], help="field for the spin rule")
    e.add_argument("--coupling", action="store_true")
    e.add_argument("--dt", type=float, default=0.05)
    e.add_argument("--modulus", type=int, default=None)
    e.add_argument("--boundary", choices=("periodic", "open"), default="periodic")
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--csv")
    e.add_argument("--pgm")

    k = add("kernel", cmd_kernel, help="transition amplitudes")
    k.add_argument("kind", choices=("ho", "mcell", "walk", "zk", "ising"))
    k.add_argument("--steps", type=int, default=1)
    k.add_argument("--phi", type=float)
    k.add_argument("--w", type=float, default=0.0)
    k.add_argument("--x0", type=float, default=0.0)
    k.add_argument("--xn", type=float, default=0.0)
    k.add_argument("--row0", type=_floats, default=[0.0])
    k.add_argument("--rown", type=_floats, default=[0.0])
    k.add_argument("--oracle", action="store_true")
    k.add_argument("--k", type=int, default=2)
    k.add_argument("--xi", type=int, default=0)
    k.add_argument("--xf", type=int, default=0)
    k.add_argument("--t", type=float, default=0.0)
    k.add_argument("--m-max", dest="m_max", type=int)

    d = add("doubling", cmd_doubling, help="zeros of the lattice Dirac operator")
    d.add_argument("--r", type=float, required=True)
    d.add_argument("--dim", type=int, choices=(1, 2), default=1)
    d.add_argument("--grid", type=int, default=256)

    g = add("grassmann", cmd_grassmann, help="Berezin integration checks")
    g.add_argument("kind", choices=("det", "quartic"))
    g.add_argument("--n", type=int, default=3)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--steps", type=int, default=2)
    g.add_argument("--m", type=int, default=3)
    g.add_argument("--g", type=float, default=0.5)

    s = add("susy-check", cmd_susy_check, help="largest supersymmetry variation coefficient")
    s.add_argument("--cells", choices=("1", "m"), required=True)
    s.add_argument("--n", type=int, default=4)
    s.add_argument("--m", type=int, default=2)
    s.add_argument("--w", type=float, default=0.0)
    s.add_argument("--r", type=float, default=0.0)
    s.add_argument("--trials", type=int, default=20)
    s.add_argument("--seed", type=int, default=0)

    c = add("clock-shift", cmd_clock_shift, help="clock and shift matrix identity")
    c.add_argument("--m", type=int, required=True)

    helps = {"spectrum": "sorted eigenvalues of a spin or fermion Hamiltonian",
             "propagate": "evolve a basis state under a spin or fermion Hamiltonian"}
    for name, fn in (("spectrum", cmd_spectrum), ("propagate", cmd_propagate)):
        h = add(name, fn, help=helps[name])
        models = ("heisenberg", "tfim", "fermionized") + (("bogoliubov",) if name == "spectrum" else ())
        h.add_argument("model", choices=models)
        h.add_argument("--m", type=int, default=2)
        h.add_argument("--bx", type=float, default=0.0)
        h.add_argument("--by", type=float, default=0.0)
        h.add_argument("--bz", type=float, default=0.0)
        h.add_argument("--gamma", type=float, default=1.0)
        h.add_argument("--boundary", choices=("open", "periodic"), default="open")
        h.add_argument("--drop-boundary-term", action="store_true")
        h.add_argument("--csv")
        if name == "propagate":
            h.add_argument("--t", type=float, required=True)
            h.add_argument("--state", type=_ints, help="one bit per site, 0 = up")

    ct = add("control", cmd_control, help="unitary of a piecewise-constant control schedule")
    ct.add_argument("--schedule", required=True, help="JSON file with sites and segments")
    ct.add_argument("--compare-fermionic", action="store_true")
    ct.add_argument("--csv")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "kind", None) in ("zk", "ising"):
        args.row0_int = [int(v) for v in args.row0]
        args.rown_int = [int(v) for v in args.rown]
    try:
        args.func(args)
    except argparse.ArgumentTypeError as exc:
        parser.error(str(exc))
    except (QCAError, ValueError, TypeError, OSError, KeyError) as exc:
        sys.stderr.write(f"{type(exc).__name__}: {exc}\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
