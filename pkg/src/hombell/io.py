"""Circuit files (JSON) and sweep tables (CSV)."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

from .chsh import BellMeasurement, Binning
from .circuit import Circuit
from .gaussian import Gate, GateKind
from .herald import HeraldScheme, HeraldSpec
from .optimize import SweepPoint, SweepResult

FORMAT_VERSION = 1
_TOP_KEYS = {"format", "n_modes", "gates", "herald", "measurement"}
_GATE_KEYS = {"kind", "modes", "param"}
_HERALD_KEYS = {"scheme", "eta", "modes"}
_MEAS_KEYS = {"theta0", "theta1", "phi0", "phi1", "binning"}
_BINNING_KEYS = {"breakpoints", "values"}


class CircuitFileError(ValueError):
    """Malformed circuit document."""


def _check_keys(obj, allowed: set, required: set, where: str) -> None:
    if not isinstance(obj, dict):
        raise CircuitFileError(f"{where} must be an object")
    unknown = set(obj) - allowed
    if unknown:
        raise CircuitFileError(f"unknown field(s) in {where}: {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise CircuitFileError(f"missing field(s) in {where}: {sorted(missing)}")


def _number(x, where: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
        raise CircuitFileError(f"{where} must be a finite number, got {x!r}")
    return float(x)


def _binning_to_json(b: Binning):
    if b == Binning.sign():
        return "sign"
    return {"breakpoints": list(b.breakpoints), "values": list(b.values)}


def _binning_from_json(obj, where: str) -> Binning:
    if obj == "sign":
        return Binning.sign()
    _check_keys(obj, _BINNING_KEYS, _BINNING_KEYS, where)
    try:
        return Binning(tuple(obj["breakpoints"]), tuple(obj["values"]))
    except (TypeError, ValueError) as exc:
        raise CircuitFileError(f"{where}: {exc}") from None


def circuit_to_dict(circuit: Circuit, meas: BellMeasurement | None = None) -> dict:
    meas = meas or BellMeasurement()
    spec = circuit.herald
    schemes = [s.value for s in spec.schemes]
    etas = list(spec.etas)
    herald = {
        "scheme": schemes[0] if len(set(schemes)) == 1 else schemes,
        "eta": etas[0] if len(set(etas)) == 1 else etas,
        "modes": list(spec.modes),
    }
    if not spec.modes:
        herald["scheme"], herald["eta"] = HeraldScheme.CLICK.value, 1.0
    if meas.binning_a == meas.binning_b:
        binning = _binning_to_json(meas.binning_a)
    else:
        binning = {"a": _binning_to_json(meas.binning_a), "b": _binning_to_json(meas.binning_b)}
    return {
        "format": FORMAT_VERSION,
        "n_modes": circuit.n_modes,
        "gates": [{"kind": g.kind.value, "modes": list(g.modes), "param": g.param}
                  for g in circuit.gates],
        "herald": herald,
        "measurement": {"theta0": meas.theta0, "theta1": meas.theta1,
                        "phi0": meas.phi0, "phi1": meas.phi1, "binning": binning},
    }


def circuit_from_dict(doc) -> tuple[Circuit, BellMeasurement]:
    _check_keys(doc, _TOP_KEYS, {"format", "n_modes", "gates"}, "circuit file")
    if doc["format"] != FORMAT_VERSION:
        raise CircuitFileError(f"unsupported format {doc['format']!r}")
    n_modes = doc["n_modes"]
    if isinstance(n_modes, bool) or not isinstance(n_modes, int) or n_modes < 2:
        raise CircuitFileError("n_modes must be an integer >= 2")
    if not isinstance(doc["gates"], list):
        raise CircuitFileError("gates must be a list")
    gates = []
    for k, g in enumerate(doc["gates"]):
        _check_keys(g, _GATE_KEYS, _GATE_KEYS, f"gate {k}")
        if not isinstance(g["modes"], list) or not all(
                isinstance(m, int) and not isinstance(m, bool) for m in g["modes"]):
            raise CircuitFileError(f"gate {k}: modes must be a list of integers")
        try:
            gates.append(Gate(GateKind(g["kind"]), tuple(g["modes"]),
                              _number(g["param"], f"gate {k} param")))
        except ValueError as exc:
            raise CircuitFileError(f"gate {k}: {exc}") from None

    h = doc.get("herald", {"modes": []})
    _check_keys(h, _HERALD_KEYS, {"modes"}, "herald")
    modes = h["modes"]
    if not isinstance(modes, list):
        raise CircuitFileError("herald modes must be a list")
    scheme, eta = h.get("scheme", "click"), h.get("eta", 1.0)
    schemes = scheme if isinstance(scheme, list) else [scheme] * len(modes)
    etas = eta if isinstance(eta, list) else [eta] * len(modes)
    try:
        spec = HeraldSpec(tuple(modes), tuple(HeraldScheme.parse(s) for s in schemes),
                          tuple(_number(e, "herald eta") for e in etas))
        circuit = Circuit(n_modes, tuple(gates), spec)
    except (ValueError, AttributeError) as exc:
        raise CircuitFileError(str(exc)) from None

    m = doc.get("measurement", {})
    _check_keys(m, _MEAS_KEYS, set(), "measurement")
    default = BellMeasurement()
    angles = {k: _number(m.get(k, getattr(default, k)), k)
              for k in ("theta0", "theta1", "phi0", "phi1")}
    binning = m.get("binning", "sign")
    if isinstance(binning, dict) and set(binning) == {"a", "b"}:
        ba = _binning_from_json(binning["a"], "binning a")
        bb = _binning_from_json(binning["b"], "binning b")
    else:
        ba = bb = _binning_from_json(binning, "binning")
    return circuit, BellMeasurement(binning_a=ba, binning_b=bb, **angles)


def dumps_circuit(circuit: Circuit, meas: BellMeasurement | None = None) -> str:
    return json.dumps(circuit_to_dict(circuit, meas), indent=2) + "\n"


def loads_circuit(text: str) -> tuple[Circuit, BellMeasurement]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CircuitFileError(f"invalid JSON: {exc}") from None
    return circuit_from_dict(doc)


def read_circuit(path) -> tuple[Circuit, BellMeasurement]:
    return loads_circuit(Path(path).read_text())


def write_circuit(path, circuit: Circuit, meas: BellMeasurement | None = None) -> None:
    Path(path).write_text(dumps_circuit(circuit, meas))


def sweep_to_csv(sweep: SweepResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([sweep.variable, "chsh", "herald_probability"])
    for p in sweep.points:
        w.writerow([f"{p.x:.17g}", f"{p.chsh:.17g}", f"{p.herald_probability:.17g}"])
    return buf.getvalue()


def sweep_from_csv(text: str) -> SweepResult:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0][1:] != ["chsh", "herald_probability"]:
        raise ValueError("not a sweep table")
    points = tuple(SweepPoint(float(x), float(c), float(p), ()) for x, c, p in rows[1:])
    return SweepResult(rows[0][0], points)
