"""Discrete-event Monte Carlo estimation over compiled models.

One run is a sequential event loop over the per-module automata: while any
urgent output is enabled somewhere, urgent actions fire at zero time cost
(the tie-break order among them is irrelevant on weakly deterministic
models); otherwise time advances to the earliest enabling clock and that
unique non-urgent output fires.  Every firing is broadcast: the owner
moves and every listener module takes its (unique) input transition.

Reproducibility contract: the generator is Philox, a named counter-based
64-bit generator.  Stream splitting is documented and fixed: one stream
per (seed, run, clock) for clock resampling, one per (seed, run, module)
for the discrete branch choices of ``random``-policy repair boxes, and one
tie-break stream per run used only by the ``random`` scheduling policy.
Because clocks own their streams, two runs with the same seed but
different urgent tie-break policies draw identical clock values, which is
what makes twin-run comparisons of policies meaningful.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from statistics import NormalDist

import numpy as np

from rftsim.compiler import CompiledModel
from rftsim.errors import Deadlock, UrgentLivelock
from rftsim.iosa.expand import expand

_CASCADE_FACTOR = 10  # livelock bound: this many urgent firings per module


@dataclass
class SimEstimate:
    metric: str
    value: float
    half_width: float
    confidence: float
    runs: int
    seed: int
    horizon: float
    policy: str = "lex"
    events: int = 0
    elapsed: float = 0.0

    @property
    def interval(self):
        return (self.value - self.half_width, self.value + self.half_width)

    def overlaps(self, other):
        lo1, hi1 = self.interval
        lo2, hi2 = other.interval
        return lo1 <= hi2 and lo2 <= hi1


@dataclass
class RunResult:
    first_failure: float = None
    failed_time: float = 0.0
    end_time: float = 0.0
    events: int = 0


class Simulation:
    """Executable form of a compiled model."""

    def __init__(self, compiled: CompiledModel, *, seed=0, policy="lex", trace=None):
        if policy not in ("lex", "revlex", "random"):
            raise ValueError(f"unknown tie-break policy {policy!r}")
        self.seed = int(seed)
        self.policy = policy
        self.trace = trace
        self.names = [m.name for m in compiled.modules]
        automata = [expand(m, compiled.table) for m in compiled.modules]
        self._build(automata, compiled)

    def _build(self, automata, compiled):
        self.n = len(automata)
        self.init = tuple(a.init_state for a in automata)
        self.urgent_out = []   # [module][state] -> ((action, resets, targets), ...)
        self.timed_out = []    # [module][state] -> ((action, clock, resets, targets), ...)
        self.response = []     # [module][(state, action)] -> (resets, targets)
        self.owner = {}
        self.listeners = {}
        clock_mod = {}
        for i, aut in enumerate(automata):
            uo = [[] for _ in range(aut.n_states)]
            to = [[] for _ in range(aut.n_states)]
            resp = {}
            for t in aut.transitions:
                act = aut.actions[t.action]
                resets = tuple(sorted(t.resets))
                if act.direction == "output":
                    self.owner[t.action] = i
                    if act.urgent:
                        uo[t.source].append((t.action, resets, t.targets))
                    else:
                        to[t.source].append((t.action, next(iter(t.clocks)), resets,
                                             t.targets))
                else:
                    # structural checks guarantee input determinism
                    resp[(t.source, t.action)] = (resets, t.targets)
                    self.listeners.setdefault(t.action, [])
                    if i not in self.listeners[t.action]:
                        self.listeners[t.action].append(i)
            self.urgent_out.append([tuple(sorted(x)) for x in uo])
            self.timed_out.append([tuple(sorted(x)) for x in to])
            self.response.append(resp)
            for cname, clk in aut.clocks.items():
                clock_mod[cname] = clk.law
        self.clock_names = sorted(clock_mod)
        self.clock_law = [clock_mod[c] for c in self.clock_names]
        self.clock_id = {c: i for i, c in enumerate(self.clock_names)}
        self.monitor_idx = self.names.index(compiled.monitor)
        mon = automata[self.monitor_idx]
        self.monitor_failed = [lab == "failed=true" for lab in mon.state_labels]
        self.livelock_bound = _CASCADE_FACTOR * self.n

    # --- rng streams ------------------------------------------------------

    def _gen(self, run, stream):
        key = np.array([self.seed & 0xFFFFFFFFFFFFFFFF,
                        ((run & 0xFFFFFFFFFFF) << 20) | stream], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def _streams(self, run):
        nclk = len(self.clock_names)
        clocks = [self._gen(run, i) for i in range(nclk)]
        choices = [self._gen(run, nclk + i) for i in range(self.n)]
        tiebreak = self._gen(run, nclk + self.n)
        return clocks, choices, tiebreak

    # --- one run ------------------------------------------------------------

    def run(self, run_index, horizon, *, stop_on_failure=False) -> RunResult:
        clk_gen, choice_gen, tb_gen = self._streams(run_index)
        if self.trace is not None:
            self.trace.write(f"run={run_index}\n")
        law = self.clock_law
        expiry = [law[i].sample(clk_gen[i]) for i in range(len(law))]
        local = list(self.init)
        now = 0.0
        events = 0
        cascade = 0
        res = RunResult()
        failed = self.monitor_failed[local[self.monitor_idx]]
        failed_since = 0.0

        urgent = {}
        for i in range(self.n):
            u = self.urgent_out[i][local[i]]
            if u:
                urgent[i] = u

        def fire(action, resets, targets, owner_idx, kind):
            nonlocal failed, failed_since, events
            events += 1
            if len(targets) == 1:
                tgt = targets[0][1]
            else:
                r = choice_gen[owner_idx].random()
                acc = 0.0
                tgt = targets[-1][1]
                for p, cand in targets:
                    acc += p
                    if r < acc:
                        tgt = cand
                        break
            touched = []
            if local[owner_idx] != tgt:
                local[owner_idx] = tgt
                touched.append(owner_idx)
            for cname in resets:
                i = self.clock_id[cname]
                expiry[i] = now + law[i].sample(clk_gen[i])
            for j in self.listeners.get(action, ()):
                if j == owner_idx:
                    continue
                r = self.response[j].get((local[j], action))
                if r is None:
                    continue
                rresets, rtargets = r
                tgt = rtargets[0][1]
                for cname in rresets:
                    i = self.clock_id[cname]
                    expiry[i] = now + law[i].sample(clk_gen[i])
                if local[j] != tgt:
                    local[j] = tgt
                    touched.append(j)
            for i in touched:
                u = self.urgent_out[i][local[i]]
                if u:
                    urgent[i] = u
                elif i in urgent:
                    del urgent[i]
            if self.trace is not None:
                self.trace.write(f"t={now!r} module={self.names[owner_idx]} "
                                 f"action={action} kind={kind}\n")
            was = failed
            failed = self.monitor_failed[local[self.monitor_idx]]
            if failed != was:
                if failed:
                    failed_since = now
                    if res.first_failure is None:
                        res.first_failure = now
                else:
                    res.failed_time += now - failed_since

        while True:
            if urgent:
                cascade += 1
                if cascade > self.livelock_bound:
                    raise UrgentLivelock(
                        f"urgent cascade exceeded {self.livelock_bound} firings "
                        f"at t={now}")
                if self.policy == "random":
                    flat = sorted((a, r, tg, i) for i, group in urgent.items()
                                  for (a, r, tg) in group)
                    action, resets, targets, i = flat[int(tb_gen.integers(0, len(flat)))]
                else:
                    pick = min if self.policy == "lex" else max
                    action, resets, targets, i = pick(
                        (a, r, tg, i) for i, group in urgent.items()
                        for (a, r, tg) in group)
                fire(action, resets, targets, i, "urgent")
                if stop_on_failure and res.first_failure is not None:
                    res.end_time = now
                    res.events = events
                    return res
                continue
            cascade = 0
            best = None
            tie = False
            for i in range(self.n):
                for (action, cname, resets, targets) in self.timed_out[i][local[i]]:
                    texp = expiry[self.clock_id[cname]]
                    cand = (texp, action, resets, targets, i)
                    if best is None:
                        best = cand
                    elif cand[0] == best[0]:
                        tie = True  # measure-zero under continuous laws
                        if cand[1] < best[1]:
                            best = cand
                    elif cand[0] < best[0]:
                        best = cand
                        tie = False
            if best is None:
                raise Deadlock(f"no enabled action at t={now}",
                               self._dump(local, expiry, now))
            if tie and self.trace is not None:
                self.trace.write(f"t={best[0]!r} tie-break lexicographic\n")
            tnext = max(best[0], now)  # stale clocks cannot move time backwards
            if tnext >= horizon:
                if failed:
                    res.failed_time += horizon - failed_since
                res.end_time = horizon
                res.events = events
                return res
            now = tnext
            fire(best[1], best[2], best[3], best[4], "timed")
            if stop_on_failure and res.first_failure is not None:
                res.end_time = now
                res.events = events
                return res

    def _dump(self, local, expiry, now):
        lines = [f"t={now}"]
        for i, name in enumerate(self.names):
            lines.append(f"  {name}: state #{local[i]}")
        for c, i in self.clock_id.items():
            lines.append(f"  clock {c}: expiry {expiry[i]}")
        return "\n".join(lines)

    def events(self, run_index, horizon):
        """One run's full event sequence as (t, module, action, kind) rows.

        Convenience wrapper around :meth:`run` with an in-memory trace;
        handy for inspecting individual trajectories.
        """
        import io

        buf = io.StringIO()
        saved = self.trace
        self.trace = buf
        try:
            self.run(run_index, horizon)
        finally:
            self.trace = saved
        out = []
        for line in buf.getvalue().splitlines():
            if line.startswith("run=") or "tie-break" in line:
                continue
            fields = dict(part.split("=", 1) for part in line.split())
            out.append((float(fields["t"]), fields["module"],
                        fields["action"], fields["kind"]))
        return out


# --- estimators --------------------------------------------------------------


def _zscore(confidence):
    return NormalDist().inv_cdf(0.5 + confidence / 2.0)


def _run_many(compiled, horizon, runs, seed, policy, stop_on_failure, jobs, trace):
    if jobs > 1 and trace is not None:
        raise ValueError("tracing requires --jobs 1")
    if jobs > 1:
        from multiprocessing import get_context

        ctx = get_context("spawn")
        chunks = [(compiled, horizon, seed, policy, stop_on_failure, lo,
                   min(lo + max(1, runs // jobs), runs))
                  for lo in range(0, runs, max(1, runs // jobs))]
        with ctx.Pool(jobs) as pool:
            parts = pool.map(_worker, chunks)
        out = []
        for part in parts:
            out.extend(part)
        return out
    sim = Simulation(compiled, seed=seed, policy=policy, trace=trace)
    return [sim.run(i, horizon, stop_on_failure=stop_on_failure)
            for i in range(runs)]


def _worker(args):
    compiled, horizon, seed, policy, stop_on_failure, lo, hi = args
    sim = Simulation(compiled, seed=seed, policy=policy)
    return [sim.run(i, horizon, stop_on_failure=stop_on_failure)
            for i in range(lo, hi)]


def estimate_unreliability(compiled, horizon, runs, seed, *, confidence=0.95,
                           policy="lex", jobs=1, trace=None) -> SimEstimate:
    """Probability that the top event occurs within the horizon."""
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    if runs < 2:
        raise ValueError("need at least 2 runs")
    t0 = time.perf_counter()
    if horizon == 0:
        return SimEstimate("unreliability", 0.0, 0.0, confidence, runs, seed,
                           horizon, policy)
    results = _run_many(compiled, horizon, runs, seed, policy, True, jobs, trace)
    hits = sum(1 for r in results
               if r.first_failure is not None and r.first_failure <= horizon)
    p = hits / runs
    half = _zscore(confidence) * math.sqrt(p * (1.0 - p) / runs)
    return SimEstimate("unreliability", p, half, confidence, runs, seed, horizon,
                       policy, sum(r.events for r in results),
                       time.perf_counter() - t0)


def estimate_unavailability(compiled, horizon, runs, seed, *, confidence=0.95,
                            policy="lex", jobs=1, trace=None) -> SimEstimate:
    """Long-run fraction of time the top event holds, over [0, horizon]."""
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    if runs < 2:
        raise ValueError("need at least 2 runs")
    t0 = time.perf_counter()
    results = _run_many(compiled, horizon, runs, seed, policy, False, jobs, trace)
    fracs = [r.failed_time / horizon for r in results]
    mean = sum(fracs) / runs
    var = sum((x - mean) ** 2 for x in fracs) / (runs - 1)
    half = _zscore(confidence) * math.sqrt(var / runs)
    return SimEstimate("unavailability", mean, half, confidence, runs, seed,
                       horizon, policy, sum(r.events for r in results),
                       time.perf_counter() - t0)


@dataclass
class ProbeReport:
    """Cross-policy comparison used as a runtime weak-determinism check."""

    metric: str
    estimates: dict = field(default_factory=dict)  # policy -> SimEstimate
    max_difference: float = 0.0
    intervals_overlap: bool = True

    def __str__(self):
        lines = [f"order-invariance probe ({self.metric}):"]
        for pol, est in self.estimates.items():
            lines.append(f"  {pol:7s} {est.value:.6f} +- {est.half_width:.6f}")
        lines.append(f"  max difference {self.max_difference:.6f}; "
                     f"CIs {'overlap' if self.intervals_overlap else 'DISJOINT'}")
        return "\n".join(lines)


def order_invariance_probe(compiled, horizon, runs, seed, *, metric="unavailability",
                           confidence=0.95,
                           policies=("lex", "revlex", "random")) -> ProbeReport:
    """Re-estimate under different urgent tie-break policies.

    On a weakly deterministic model the policy cannot matter, so the
    confidence intervals must overlap (the point estimates differ only
    because the random policy consumes its own stream).
    """
    est = estimate_unreliability if metric == "unreliability" else estimate_unavailability
    report = ProbeReport(metric)
    for pol in policies:
        report.estimates[pol] = est(compiled, horizon, runs, seed,
                                    confidence=confidence, policy=pol)
    vals = [e.value for e in report.estimates.values()]
    report.max_difference = max(vals) - min(vals)
    ests = list(report.estimates.values())
    report.intervals_overlap = all(a.overlaps(b) for i, a in enumerate(ests)
                                   for b in ests[i + 1:])
    return report
