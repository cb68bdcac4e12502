"""Seeded experiment drivers with CSV, SVG and config plumbing.

Every driver derives one seed per trial from (master seed, experiment
label, trial index), never from the noise level, so sweeps over epsilon
are threshold-coupled: the same trial index sees nested noise masks as
epsilon grows.  Results are reduced in trial order, which keeps the
output byte-identical across runs and across worker counts.
"""

from __future__ import annotations

import concurrent.futures
import functools
import io
import math
import os
from dataclasses import dataclass, replace

import numpy as np

from . import automaton1d as a1d
from . import robinson as rb
from .besicovitch import DistanceEstimate, lower_certificate
from .core import (
    ALTERNATING,
    GOLDEN_MEAN,
    Grid,
    NoiseMask,
    Sft,
    is_locally_admissible,
    parse_sft,
)
from .noise import derive_seed, marginal_rate, parse_model, sample_mask
from .percolation import exclusion_bound, origin_exclusion_estimate
from .repair import (
    PeriodicSft,
    local_global_constant,
    parse_periodic,
    repair_1d,
    repair_periodic,
)

SCHEMA = ("experiment", "sft", "model", "epsilon", "box", "trials",
          "seed", "metric", "value", "ci95")

KINDS = ("analyze", "sample", "repair1d", "repair2d", "robinson_repair",
         "perc", "instability_phase1d", "instability_bern1d",
         "instability_grid2d", "sweep")

CHECKERBOARD_TEXT = """
dim 2
alphabet a b
forbid (0,0)=a (0,1)=a
forbid (0,0)=b (0,1)=b
forbid (0,0)=a (1,0)=a
forbid (0,0)=b (1,0)=b
period 2
base a b b a
"""

STRIPES_TEXT = """
dim 2
alphabet a b c
forbid (0,0)=a (0,1)=b
forbid (0,0)=a (0,1)=c
forbid (0,0)=b (0,1)=a
forbid (0,0)=b (0,1)=c
forbid (0,0)=c (0,1)=a
forbid (0,0)=c (0,1)=b
forbid (0,0)=a (1,0)=a
forbid (0,0)=a (1,0)=c
forbid (0,0)=b (1,0)=a
forbid (0,0)=b (1,0)=b
forbid (0,0)=c (1,0)=b
forbid (0,0)=c (1,0)=c
period 3
base a a a b b b c c c
"""

NAMED_1D = {"golden-mean": GOLDEN_MEAN, "alternating": ALTERNATING}
NAMED_PERIODIC = {"checkerboard": CHECKERBOARD_TEXT, "stripes": STRIPES_TEXT}


def resolve_sft_1d(spec: str) -> tuple[str, Sft]:
    """A named 1D system or a description-file path."""
    if spec in NAMED_1D:
        return spec, NAMED_1D[spec]
    if os.path.exists(spec):
        with open(spec, encoding="utf-8") as fh:
            return os.path.splitext(os.path.basename(spec))[0], parse_sft(fh.read())
    raise ValueError(f"unknown SFT {spec!r}: not a registered name or a file")


def resolve_periodic(spec: str) -> tuple[str, PeriodicSft]:
    if spec in NAMED_PERIODIC:
        return spec, parse_periodic(NAMED_PERIODIC[spec])
    if os.path.exists(spec):
        with open(spec, encoding="utf-8") as fh:
            return (os.path.splitext(os.path.basename(spec))[0],
                    parse_periodic(fh.read()))
    raise ValueError(f"unknown periodic SFT {spec!r}")


# ---------------------------------------------------------------------------
# experiment description


@dataclass
class ExperimentSpec:
    kind: str
    sft: str = "golden-mean"
    epsilons: tuple[float, ...] = ()
    box: tuple[int, ...] = (100_000,)
    trials: int = 10
    seed: int = 0
    scales: tuple[int, ...] = (2,)  # robinson only
    c: int | None = None
    proxy: str = "largest"
    p: int = 2        # phase1d period
    k: int = 1        # grid2d slab width
    n: int = 1        # grid2d clear blocks hold n x n periods
    threads: int = 1
    out: str | None = None
    plot: str | None = None

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        for e in self.epsilons:
            if not 0.0 <= e <= 1.0:
                raise ValueError(f"epsilon {e} outside [0, 1]")
        if self.trials < 1:
            raise ValueError("need at least one trial")
        if any(side < 1 for side in self.box):
            raise ValueError("box sides must be positive")
        if self.threads < 1:
            raise ValueError("threads must be positive")
        if self.kind in ("repair1d", "instability_bern1d") or (
                self.kind in ("analyze", "sample") and self.sft):
            if self.sft not in NAMED_1D and self.sft not in NAMED_PERIODIC \
                    and not os.path.exists(self.sft):
                raise ValueError(f"SFT file {self.sft!r} does not exist")


def _box_str(box) -> str:
    return "x".join(str(s) for s in box)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return format(v, ".10g")
    return str(v)


def format_csv(rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(SCHEMA) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(row.get(col, "")) for col in SCHEMA) + "\n")
    return buf.getvalue()


def write_csv(path: str, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_csv(rows))


def mean_ci(vals) -> tuple[float, float]:
    arr = np.asarray(vals, dtype=np.float64)
    mean = float(arr.mean())
    if arr.size > 1:
        ci = 1.96 * float(arr.std(ddof=1)) / math.sqrt(arr.size)
    else:
        ci = 0.0
    return mean, ci


def _pool_map(fn, payloads, threads: int):
    payloads = list(payloads)
    if threads <= 1 or len(payloads) <= 1:
        return [fn(p) for p in payloads]
    workers = min(threads, len(payloads))
    chunk = max(1, len(payloads) // (4 * workers))
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, payloads, chunksize=chunk))


# ---------------------------------------------------------------------------
# clean-sample helpers


def sample_admissible_word(auto: a1d.WordAutomaton, length: int,
                           seed: int) -> np.ndarray:
    """A random globally admissible word from a live-state walk."""
    if length < auto.word_len:
        raise ValueError("box shorter than the automaton word length")
    live = [i for i, e in enumerate(auto.edges) if e]
    if not live:
        raise ValueError("automaton has no admissible configurations")
    rng = np.random.default_rng(seed)
    draws = rng.integers(0, 1 << 32, size=length + 1)
    state = live[int(draws[0]) % len(live)]
    out = list(auto.states[state])
    edges = auto.edges
    for i in range(length - len(out)):
        opts = edges[state]
        if not opts:
            raise ValueError("walk reached a dead state; target is reducible")
        letter, state = opts[int(draws[i + 1]) % len(opts)]
        out.append(letter)
    return np.asarray(out[:length], dtype=np.int64)


def corrupt(data: np.ndarray, mask: np.ndarray, nsym: int,
            seed: int) -> np.ndarray:
    """Resample the obscured cells uniformly over the alphabet."""
    rng = np.random.default_rng(seed)
    noisy = data.copy()
    noisy[mask] = rng.integers(0, nsym, size=int(mask.sum()))
    return noisy


# ---------------------------------------------------------------------------
# repair sweeps


def _trial_repair1d(payload):
    sft, eps, length, tseed = payload
    auto = _auto_cached(sft)
    word = sample_admissible_word(auto, length, derive_seed(tseed, "clean"))
    mask = sample_mask(parse_model(f"bernoulli:{eps}"), (length,),
                       derive_seed(tseed, "mask"))
    noisy = corrupt(word, mask.data.astype(bool), len(sft.alphabet),
                    derive_seed(tseed, "corrupt"))
    rep = repair_1d(auto, Grid((0,), noisy), mask)
    lo, hi = rep.interior
    # locally admissible == globally admissible on an irreducible target
    admissible = is_locally_admissible(
        sft, Grid((0,), rep.grid.data[lo:hi]))
    pos = np.flatnonzero(rep.changed)
    pos = pos[(pos >= lo) & (pos < hi)]
    local = bool(np.all(_locality_flags(pos, np.flatnonzero(mask.data),
                                        rep.constants, lo, hi)))
    return rep.changed_fraction, bool(admissible), local


def _locality_flags(pos: np.ndarray, obscured: np.ndarray,
                    consts: a1d.RepairConstants, lo: int, hi: int) -> np.ndarray:
    """Per changed cell: within E of an obscured cell, or within the 2C
    end-peel margin.  All-true is the repair locality guarantee."""
    if pos.size == 0:
        return np.ones(0, dtype=bool)
    far = 1 << 40
    if obscured.size:
        j = np.searchsorted(obscured, pos)
        left = np.where(j > 0, pos - obscured[np.maximum(j - 1, 0)], far)
        right = np.where(j < obscured.size,
                         obscured[np.minimum(j, obscured.size - 1)] - pos, far)
        near_noise = np.minimum(left, right) <= consts.E
    else:
        near_noise = np.zeros(pos.size, dtype=bool)
    near_edge = (pos - lo < 2 * consts.C) | (hi - 1 - pos < 2 * consts.C)
    return near_noise | near_edge


@functools.lru_cache(maxsize=32)
def _auto_cached(sft: Sft) -> a1d.WordAutomaton:
    return a1d.build_automaton(sft)


def run_repair1d_sweep(spec: ExperimentSpec):
    """One row group per epsilon: mean changed fraction on the interior,
    admissible fraction, locality fraction, and the theorem envelope."""
    spec.validate()
    name, sft = resolve_sft_1d(spec.sft)
    auto = _auto_cached(sft)
    cls = a1d.classify(auto)
    if cls.kind != "irreducible_aperiodic":
        raise ValueError("repair sweep needs an irreducible aperiodic target")
    consts = a1d.repair_constants(auto)
    length = spec.box[0]
    rows = []
    tseeds = [derive_seed(spec.seed, "repair1d", t) for t in range(spec.trials)]
    for eps in spec.epsilons:
        res = _pool_map(_trial_repair1d,
                        [(sft, eps, length, s) for s in tseeds], spec.threads)
        changed, adm, loc = zip(*res)
        base = {"experiment": "repair1d", "sft": name,
                "model": f"bernoulli:{_fmt(eps)}", "epsilon": eps,
                "box": _box_str(spec.box), "trials": spec.trials,
                "seed": spec.seed}
        m, ci = mean_ci(changed)
        rows.append(dict(base, metric="changed_fraction", value=m, ci95=ci))
        m, ci = mean_ci([1.0 if a else 0.0 for a in adm])
        rows.append(dict(base, metric="admissible", value=m, ci95=ci))
        m, ci = mean_ci([1.0 if v else 0.0 for v in loc])
        rows.append(dict(base, metric="locality", value=m, ci95=ci))
        rows.append(dict(base, metric="bound",
                         value=3.0 * (2 * consts.E + 1) * eps, ci95=0.0))
    return rows


def run_perc_sweep(spec: ExperimentSpec):
    spec.validate()
    c = 1 if spec.c is None else spec.c
    box = spec.box[0]
    rows = []
    for eps in spec.epsilons:
        est = origin_exclusion_estimate(
            eps, c, box, spec.trials,
            derive_seed(spec.seed, "perc-sweep", c), proxy=spec.proxy)
        base = {"experiment": "perc", "sft": f"free-c{c}",
                "model": f"bernoulli:{_fmt(eps)}", "epsilon": eps,
                "box": _box_str((box, box)), "trials": spec.trials,
                "seed": spec.seed}
        rows.append(dict(base, metric="origin_excluded",
                         value=est.value, ci95=est.ci95))
        rows.append(dict(base, metric="exclusion_bound",
                         value=est.bound, ci95=0.0))
    return rows


def _trial_repair2d(payload):
    ptext, eps, shape, c, tseed = payload
    p = _periodic_cached(ptext)
    orbit = p.orbit()
    rng = np.random.default_rng(derive_seed(tseed, "offset"))
    offset = orbit[int(rng.integers(len(orbit)))]
    clean = p.tiling(offset, (0, 0), shape)
    mask = sample_mask(parse_model(f"bernoulli:{eps}"), shape,
                       derive_seed(tseed, "mask"))
    noisy = corrupt(clean.data, mask.data.astype(bool),
                    len(p.sft.alphabet), derive_seed(tseed, "corrupt"))
    rep = repair_periodic(p, Grid((0, 0), noisy), mask, c=c)
    return rep.changed_fraction, tuple(rep.offset) == tuple(offset)


@functools.lru_cache(maxsize=8)
def _periodic_cached(text: str) -> PeriodicSft:
    return parse_periodic(text)


def run_repair2d_sweep(spec: ExperimentSpec):
    spec.validate()
    if spec.sft in NAMED_PERIODIC:
        name, ptext = spec.sft, NAMED_PERIODIC[spec.sft]
    elif os.path.exists(spec.sft):
        with open(spec.sft, encoding="utf-8") as fh:
            ptext = fh.read()
        name = os.path.splitext(os.path.basename(spec.sft))[0]
    else:
        raise ValueError(f"unknown periodic SFT {spec.sft!r}")
    p = _periodic_cached(ptext)
    c = local_global_constant(p) if spec.c is None else spec.c
    shape = tuple(spec.box) if len(spec.box) == 2 else (spec.box[0],) * 2
    rows = []
    tseeds = [derive_seed(spec.seed, "repair2d", t) for t in range(spec.trials)]
    for eps in spec.epsilons:
        res = _pool_map(_trial_repair2d,
                        [(ptext, eps, shape, c, s) for s in tseeds],
                        spec.threads)
        changed, offs = zip(*res)
        base = {"experiment": "repair2d", "sft": name,
                "model": f"bernoulli:{_fmt(eps)}", "epsilon": eps,
                "box": _box_str(shape), "trials": spec.trials,
                "seed": spec.seed}
        m, ci = mean_ci(changed)
        rows.append(dict(base, metric="changed_fraction", value=m, ci95=ci))
        m, ci = mean_ci([1.0 if o else 0.0 for o in offs])
        rows.append(dict(base, metric="offset_recovered", value=m, ci95=ci))
        rows.append(dict(base, metric="bound",
                         value=2.0 * exclusion_bound(eps, c), ci95=0.0))
    return rows


def _trial_robinson(payload):
    n_scale, eps, shape, tseed = payload
    rng = np.random.default_rng(derive_seed(tseed, "translate"))
    t_in = tuple(int(v) for v in rng.integers(0, 512, size=2))
    clean = rb.reference_window((0, 0), shape, t_in)
    mask = sample_mask(parse_model(f"bernoulli:{eps}"), shape,
                       derive_seed(tseed, "mask"))
    noisy = corrupt(clean, mask.data.astype(bool), rb.NTILES,
                    derive_seed(tseed, "corrupt"))
    rep = rb.robinson_repair(Grid((0, 0), noisy), mask, n_scale, seed=tseed)
    period = 2 ** (n_scale + 1)
    t_ok = rep.translate == (t_in[0] % period, t_in[1] % period)
    return rep.changed_fraction, bool(t_ok), rep.slack


def run_robinson_repair(spec: ExperimentSpec):
    spec.validate()
    shape = tuple(spec.box) if len(spec.box) == 2 else (spec.box[0],) * 2
    rows = []
    for n_scale in spec.scales:
        tseeds = [derive_seed(spec.seed, "robinson", n_scale, t)
                  for t in range(spec.trials)]
        for eps in spec.epsilons:
            res = _pool_map(_trial_robinson,
                            [(n_scale, eps, shape, s) for s in tseeds],
                            spec.threads)
            changed, t_ok, slacks = zip(*res)
            base = {"experiment": "robinson", "sft": f"robinson-{n_scale}",
                    "model": f"bernoulli:{_fmt(eps)}", "epsilon": eps,
                    "box": _box_str(shape), "trials": spec.trials,
                    "seed": spec.seed}
            m, ci = mean_ci(changed)
            rows.append(dict(base, metric="changed_fraction", value=m, ci95=ci))
            m, ci = mean_ci([1.0 if v else 0.0 for v in t_ok])
            rows.append(dict(base, metric="translate_recovered",
                             value=m, ci95=ci))
            rows.append(dict(base, metric="slack",
                             value=max(slacks), ci95=0.0))
            rows.append(dict(base, metric="bound",
                             value=rb.robinson_bound(eps, n_scale) + max(slacks),
                             ci95=0.0))
    return rows


# ---------------------------------------------------------------------------
# instability constructions


def finite_size_slack(cells: int) -> float:
    """Reported fluctuation allowance for a box of the given cell count.

    Output column only; acceptance thresholds never widen by it."""
    return 4.0 / math.sqrt(cells)


def _min_over_refs(per_ref) -> DistanceEstimate:
    """Distance to the nearest reference: trial-mean per reference first,
    then the minimum.  Per-trial minima would undershoot, since segment
    shift fluctuations let single samples drift toward either reference."""
    per_ref = np.asarray(per_ref, dtype=np.float64)
    means = per_ref.mean(axis=1)
    best = int(means.argmin())
    mean, ci = mean_ci(per_ref[best])
    return DistanceEstimate(value=mean, ci95=ci, trials=per_ref.shape[1])


@dataclass(frozen=True)
class InstabilityReport:
    kind: str
    estimate: DistanceEstimate
    certificate: float
    obscured_rate: float
    slack: float
    box: tuple[int, ...]
    trials: int
    seed: int
    model: str
    sft: str
    epsilon: float

    @property
    def finite_size_gap(self) -> float:
        """How far the estimate fell below the certificate, if at all."""
        return max(0.0, self.certificate - self.estimate.value)

    @property
    def flagged(self) -> bool:
        return self.estimate.value < self.certificate - self.slack

    def rows(self):
        base = {"experiment": self.kind, "sft": self.sft, "model": self.model,
                "epsilon": self.epsilon, "box": _box_str(self.box),
                "trials": self.trials, "seed": self.seed}
        return [
            dict(base, metric="min_density", value=self.estimate.value,
                 ci95=self.estimate.ci95),
            dict(base, metric="certificate", value=self.certificate, ci95=0.0),
            dict(base, metric="obscured_rate", value=self.obscured_rate,
                 ci95=0.0),
            dict(base, metric="slack", value=self.slack, ci95=0.0),
        ]


def run_instability_phase1d(p: int, box: int, trials: int,
                            seed: int) -> InstabilityReport:
    """Deterministic period-p mask over the {00,11} system.

    Each clear window of length p-1 copies one of the two alternating
    points, switching at every obscured cell; obscured cells copy the
    first point.  The minimum density over both points concentrates at
    1/2 - 1/(2p).
    """
    if p < 2:
        raise ValueError("p must be at least 2")
    if box < 2 * p:
        raise ValueError("box too small for the mask period")
    model = parse_model(f"grid:1,{p - 1}")
    idx = np.arange(box, dtype=np.int64)
    ref0 = (idx % 2).astype(np.int64)
    refs = [ref0, 1 - ref0]
    per_ref = np.empty((2, trials))
    obscured = 0.0
    for t in range(trials):
        mask = sample_mask(model, (box,), derive_seed(seed, "phase1d", t))
        m = mask.data.astype(bool)
        phase = int(np.flatnonzero(m)[0]) % p
        seg = (idx - phase + p) // p
        x = np.where(m, ref0, (idx + seg) % 2)
        for j, ref in enumerate(refs):
            per_ref[j, t] = float((x != ref).mean())
        obscured += float(m.mean())
    return InstabilityReport(
        kind="instability_phase1d",
        estimate=_min_over_refs(per_ref),
        certificate=lower_certificate("phase1d", p=p),
        obscured_rate=obscured / trials,
        slack=finite_size_slack(box),
        box=(box,), trials=trials, seed=seed,
        model=f"grid:1,{p - 1}", sft="alternating",
        epsilon=1.0 / p)


def _periodic_cycle(auto: a1d.WordAutomaton) -> np.ndarray:
    """Symbols along the lex-least cycle of the automaton."""
    state = 0
    seen = {state: 0}
    letters = []
    while True:
        letter, nxt = auto.edges[state][0]
        letters.append(letter)
        if nxt in seen:
            start = seen[nxt]
            return np.asarray(letters[start:], dtype=np.int64)
        seen[nxt] = len(letters)
        state = nxt


def run_instability_bern1d(sft_or_auto, epsilon: float, box: int,
                           trials: int, seed: int) -> InstabilityReport:
    """Bernoulli noise over an irreducible periodic target.

    Three steps per trial: sample the mask; cut at every run of at least
    d consecutive obscured cells; give each cut-to-cut segment an
    independent uniform translate of the periodic point, while obscured
    cells copy the untranslated point.  Distances are taken to the whole
    translate orbit and the minimum lands at (p-1)/(pd) - ((p-1)/p) eps.
    """
    auto = _coerce_auto(sft_or_auto)
    cls = a1d.classify(auto)
    if cls.kind != "irreducible_periodic":
        raise ValueError(
            f"construction needs an irreducible periodic target, got {cls.kind}")
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon outside [0, 1]")
    d = max(auto.sft.diameter, 1)
    word = _periodic_cycle(auto)
    period = len(word)
    idx = np.arange(box, dtype=np.int64)
    refs = [word[(idx + s) % period] for s in range(period)]
    model = parse_model(f"bernoulli:{epsilon}")
    per_ref = np.empty((period, trials))
    obscured = 0.0
    for t in range(trials):
        tseed = derive_seed(seed, "bern1d", t)
        mask = sample_mask(model, (box,), derive_seed(tseed, "mask")).data.astype(bool)
        run_id, nruns = _mask_runs(mask, d)
        rng = np.random.default_rng(derive_seed(tseed, "translate"))
        shifts = rng.integers(0, period, size=nruns + 1)
        x = word[(idx + shifts[run_id]) % period]
        x[mask] = word[idx[mask] % period]
        for j, ref in enumerate(refs):
            per_ref[j, t] = float((x != ref).mean())
        obscured += float(mask.mean())
    return InstabilityReport(
        kind="instability_bern1d",
        estimate=_min_over_refs(per_ref),
        certificate=lower_certificate("bern1d", p=period, d=d, epsilon=epsilon),
        obscured_rate=obscured / trials,
        slack=finite_size_slack(box),
        box=(box,), trials=trials, seed=seed,
        model=f"bernoulli:{_fmt(epsilon)}", sft=_sft_label(auto.sft),
        epsilon=epsilon)


def _coerce_auto(sft_or_auto) -> a1d.WordAutomaton:
    if isinstance(sft_or_auto, a1d.WordAutomaton):
        return sft_or_auto
    if isinstance(sft_or_auto, str):
        return _auto_cached(resolve_sft_1d(sft_or_auto)[1])
    return _auto_cached(sft_or_auto)


def _sft_label(sft: Sft) -> str:
    for name, known in NAMED_1D.items():
        if known == sft:
            return name
    return f"custom-{len(sft.alphabet)}sym"


def _mask_runs(mask: np.ndarray, d: int) -> tuple[np.ndarray, int]:
    """Segment ids split at every obscured run of length >= d.

    Returns per-cell segment indices and the number of cuts."""
    padded = np.concatenate(([False], mask, [False])).astype(np.int8)
    edges = np.flatnonzero(np.diff(padded))
    starts, stops = edges[::2], edges[1::2]
    long = stops - starts >= d
    cuts = np.zeros(mask.size + 1, dtype=np.int64)
    # a segment ends where a long run starts
    np.add.at(cuts, starts[long], 1)
    return np.cumsum(cuts)[:-1], int(long.sum())


def run_instability_grid2d(p: PeriodicSft, k: int, n: int, box: int,
                           trials: int, seed: int) -> InstabilityReport:
    """Grid noise over a single periodic orbit in 2D.

    Slabs of width k >= diameter hide every block junction; each clear
    block of side n*period copies an independent uniform orbit element,
    and obscured cells copy the first one.
    """
    if isinstance(p, str):
        p = resolve_periodic(p)[1]
    orbit = p.orbit()
    if len(orbit) < 2:
        raise ValueError("construction needs a non-constant orbit")
    if k < p.sft.diameter:
        raise ValueError(
            f"k={k} too small: junction windows need k >= {p.sft.diameter}")
    period = p.period
    block = n * period
    if block < 1:
        raise ValueError("n must be positive")
    shape = (box, box)
    tilings = np.stack([p.tiling(o, (0, 0), shape).data for o in orbit])
    stride = k + block
    rr, cc = np.indices(shape)
    per_ref = np.empty((len(orbit), trials))
    obscured = 0.0
    for t in range(trials):
        rng = np.random.default_rng(derive_seed(seed, "grid2d", t))
        ph = rng.integers(0, stride, size=2)
        mask = (((rr + ph[0]) % stride) < k) | (((cc + ph[1]) % stride) < k)
        b0 = (rr + ph[0]) // stride
        b1 = (cc + ph[1]) // stride
        choice = rng.integers(0, len(orbit),
                              size=(int(b0.max()) + 1, int(b1.max()) + 1))
        x = tilings[choice[b0, b1], rr, cc]
        x[mask] = tilings[0][mask]
        for j, tl in enumerate(tilings):
            per_ref[j, t] = float((x != tl).mean())
        obscured += float(mask.mean())
    return InstabilityReport(
        kind="instability_grid2d",
        estimate=_min_over_refs(per_ref),
        certificate=lower_certificate("grid2d", n=period, d=p.sft.dim),
        obscured_rate=obscured / trials,
        slack=finite_size_slack(box * box),
        box=shape, trials=trials, seed=seed,
        model=f"grid:{k},{block}", sft=f"periodic-{period}",
        epsilon=marginal_rate(parse_model(f"grid:{k},{block}"), 2))


# ---------------------------------------------------------------------------
# generic sweep


_SWEEP_DRIVERS = {
    "repair1d": run_repair1d_sweep,
    "perc": run_perc_sweep,
    "repair2d": run_repair2d_sweep,
    "robinson_repair": run_robinson_repair,
}


def run_sweep(spec: ExperimentSpec):
    """Cross-product sweep with per-cell error capture.

    Each epsilon cell runs independently; a failing cell contributes an
    error row and the sweep continues.  An empty epsilon list yields a
    header-only CSV.
    """
    spec.validate()
    kind = spec.kind if spec.kind != "sweep" else "repair1d"
    if kind not in _SWEEP_DRIVERS:
        raise ValueError(f"kind {kind!r} is not sweepable")
    driver = _SWEEP_DRIVERS[kind]
    rows = []
    for eps in spec.epsilons:
        cell = replace(spec, kind=kind, epsilons=(eps,))
        try:
            rows.extend(driver(cell))
        except Exception as exc:  # noqa: BLE001 - per-row capture is the contract
            rows.append({"experiment": kind, "sft": spec.sft,
                         "model": type(exc).__name__, "epsilon": eps,
                         "box": _box_str(spec.box), "trials": spec.trials,
                         "seed": spec.seed, "metric": "error",
                         "value": float("nan"), "ci95": float("nan")})
    if spec.out:
        write_csv(spec.out, rows)
    if spec.plot:
        write_plot(spec.plot, rows)
    return rows


# ---------------------------------------------------------------------------
# plotting and config files


def _log_ticks(lo: float, hi: float):
    first = math.floor(math.log10(lo))
    last = math.ceil(math.log10(hi))
    return [10.0 ** e for e in range(first, last + 1)]


def write_plot(path: str, rows, *, metric: str = "changed_fraction",
               bound_metric: str = "bound", title: str = "") -> None:
    """Minimal self-contained log-log SVG: one polyline per sft label for
    the chosen metric, the theoretical bound dashed."""
    series: dict[str, list[tuple[float, float]]] = {}
    bounds: dict[str, list[tuple[float, float]]] = {}
    present = {r.get("metric") for r in rows}
    if metric not in present:
        for row in rows:
            if row.get("metric") not in (bound_metric, "error", "slack"):
                metric = row.get("metric")
                break
    for row in rows:
        eps, val = float(row.get("epsilon", 0)), row.get("value")
        if not isinstance(val, (int, float)):
            continue
        if eps <= 0 or val <= 0 or math.isnan(val):
            continue
        key = str(row.get("sft", ""))
        if row.get("metric") == metric:
            series.setdefault(key, []).append((eps, val))
        elif row.get("metric") == bound_metric:
            bounds.setdefault(key, []).append((eps, val))
    width, height, pad = 560, 400, 56
    pts = [p for ps in series.values() for p in ps]
    pts += [p for ps in bounds.values() for p in ps]
    svg = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
           f'height="{height}" viewBox="0 0 {width} {height}" '
           f'font-family="monospace" font-size="11">',
           f'<rect width="{width}" height="{height}" fill="#fdfcf8"/>']
    if not pts:
        svg.append(f'<text x="{width // 2}" y="{height // 2}" '
                   f'text-anchor="middle">no data</text></svg>')
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(svg))
        return
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    x0, x1 = min(xs) / 1.5, max(xs) * 1.5
    y0, y1 = min(ys) / 1.5, max(ys) * 1.5

    def px(x):
        return pad + (math.log10(x) - math.log10(x0)) / \
            (math.log10(x1) - math.log10(x0)) * (width - 2 * pad)

    def py(y):
        return height - pad - (math.log10(y) - math.log10(y0)) / \
            (math.log10(y1) - math.log10(y0)) * (height - 2 * pad)

    for tx in _log_ticks(x0, x1):
        if x0 <= tx <= x1:
            svg.append(f'<line x1="{px(tx):.1f}" y1="{pad}" x2="{px(tx):.1f}" '
                       f'y2="{height - pad}" stroke="#ddd"/>')
            svg.append(f'<text x="{px(tx):.1f}" y="{height - pad + 16}" '
                       f'text-anchor="middle">1e{int(math.log10(tx))}</text>')
    for ty in _log_ticks(y0, y1):
        if y0 <= ty <= y1:
            svg.append(f'<line x1="{pad}" y1="{py(ty):.1f}" '
                       f'x2="{width - pad}" y2="{py(ty):.1f}" stroke="#ddd"/>')
            svg.append(f'<text x="{pad - 6}" y="{py(ty):.1f}" '
                       f'text-anchor="end" dy="4">1e{int(math.log10(ty))}</text>')
    svg.append(f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" '
               f'height="{height - 2 * pad}" fill="none" stroke="#444"/>')
    palette = ["#3a6ea5", "#b5413a", "#2e7d32", "#8e5e13", "#6a1b9a"]
    for i, (key, ps) in enumerate(sorted(series.items())):
        col = palette[i % len(palette)]
        ps = sorted(ps)
        line = " ".join(f"{px(x):.1f},{py(y):.1f}" for x, y in ps)
        svg.append(f'<polyline points="{line}" fill="none" stroke="{col}" '
                   f'stroke-width="1.6"/>')
        for x, y in ps:
            svg.append(f'<circle cx="{px(x):.1f}" cy="{py(y):.1f}" r="3" '
                       f'fill="{col}"/>')
        svg.append(f'<text x="{width - pad - 6}" y="{pad + 14 + 13 * i}" '
                   f'text-anchor="end" fill="{col}">{key}</text>')
    for i, (key, ps) in enumerate(sorted(bounds.items())):
        col = palette[i % len(palette)]
        ps = sorted(ps)
        line = " ".join(f"{px(x):.1f},{py(y):.1f}" for x, y in ps)
        svg.append(f'<polyline points="{line}" fill="none" stroke="{col}" '
                   f'stroke-width="1.2" stroke-dasharray="5,4" opacity="0.7"/>')
    label = title or "noise level vs distance"
    svg.append(f'<text x="{width // 2}" y="{pad - 10}" '
               f'text-anchor="middle">{label}</text>')
    svg.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(svg))


def read_config(path: str) -> dict[str, str]:
    """Flat key=value pairs, one per line, # comments allowed."""
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, val = line.split("=", 1)
            out[key.strip()] = val.strip()
    return out
