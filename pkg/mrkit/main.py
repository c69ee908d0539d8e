#!/usr/bin/env python
# -*- coding: utf-8 -*-
# Copyright 2014 The mrkit authors. See LICENSE file for details.


"""Exact series for the AKNS matrix resolvent, its wave functions and the
k-point correlation functions of the hierarchy."""


__version__ = '0.1.0'
EXTENDED_HELP = """
mrkit computes, with exact rational arithmetic, the matrix resolvent of the
AKNS hierarchy, the flows and the two-point tau-structure it generates, the
pair of wave functions at an initial slice, and the k-point correlation
functions. The latter are obtained twice, once from the resolvent and once
from the wave functions, and compared coefficient by coefficient.


Input:
    Symbolic commands (resolvent, flows, omega) work without input data and
    then act on the jet variables q0, q1, ..., r0, r1, ...

    All other commands read the initial slice from a JSON document given by
    --data FILE:

        {
          "label": "DATA2",
          "q": [[0, 0, "1"], [1, 0, "1"]],
          "r": [[0, 0, "1"], [1, 0, "-1"]],
          "truncation": {"n_x": 12, "n_xi": 8, "eps_ceiling": 8},
          "tasks": ["verify-all"],
          "bounds": {"npoint3": 1},
          "output": "text",
          "seed": 0
        }

    q and r are lists of [X power, eps power, "p/q"] triples; the example is
    q = 1 + X, r = 1 - X. Only "q" and "r" are required (use [] for zero).
    The q constant term (at X = 0) must not vanish whenever wave functions
    are involved (wave, npoint and verify on the wave or npoint tasks).

    Truncation: X-jets keep n_x powers of X (at least 4), wave functions are
    built to xi^-n_xi (at least 4), eps powers above eps_ceiling are dropped.

    Bounds for the verification suite (defaults in brackets): resolvent [8]
    level of the symbolic resolvent, nabla [5] depth of the flow derivation
    identity, omega [4] index bound of the symbolic two-point table, flows
    [2] index bound of the commuting flows, npoint2 [3] and npoint3 [2] index
    bounds of the k = 2, 3 comparisons, rank_one_xi [6] and rank_one_x [8]
    the xi and X depth reached by the rank-one form of the resolvent. The
    wave pair is built deep enough for the k-point bounds whatever n_xi is,
    and n_x is raised inside the rank-one check until its X depth is
    reached.


Output:
    Text (default) or JSON (--json, or "output": "json"). JSON output is
    byte-stable: keys are sorted, rationals are "p/q" strings, series are
    sparse maps such as {"X^0": "1", "X^2": "-1"}. Timings only appear in
    text output. Results go to stdout (or --out FILE), log messages to
    stderr.


Negative controls:
    --fault recursion    changes one constant of the resolvent recursion.
    --fault a-entry      adds 1 to the affine coefficient A(0,0).
    --fault kernel-sign  flips the sign of the 2/(xi - nu) kernel.

    Each of these must be detected by `verify`, which then exits with code 1.


Exit status:
    0 if all checks passed.
    1 if an identity was violated or two computed tables differ.
    2 for invalid input (command line, configuration file, initial data).
"""


import sys
import json
import argparse
import logging
import random
import time
from fractions import Fraction

from .series import (SeriesError, IdentityViolation, NotInvertible, Check,
    Truncation, install_truncation, get_truncation, rational,
    assert_vanishes)
from .diffpoly import InitialData, DiffPolyError, leibniz_check
from .resolvent import (mr_coeffs, mr_verify, FlowTable, flow_check,
    flows_commute, omega_table, nabla_check, tau_symmetry, remark_check,
    HALF)
from .waves import (WaveError, wave_pair, riccati_check, wronskian_d,
    pair_fix, log_derivative_check, ode_check, rank_one_check, purity_check,
    a_entry_direct)
from .correlators import (CalibrationNotFound, npoint_mr, npoint_wave,
    npoint_wave_series, omega2_as_table, omega3_table, compare,
    assert_match, zhou_calibrate)


# http://docs.python.org/3/library/sys.html#sys.stdout
stdout_write_bytes = sys.stdout.buffer.write


log = logging.getLogger()
log.setLevel(logging.ERROR)
ch = logging.StreamHandler()
formatter = logging.Formatter(
    '%(asctime)s,%(msecs)-6.1f - %(levelname)s: %(message)s',
    datefmt='%H:%M:%S')
ch.setFormatter(formatter)
log.addHandler(ch)


TASKS = ("resolvent", "flows", "omega", "wave", "npoint")
WAVE_TASKS = ("wave", "npoint")
OUTPUT_MODES = ("text", "json")
FAULTS = ("recursion", "a-entry", "kernel-sign")
CONFIG_FIELDS = ("label", "q", "r", "truncation", "tasks", "bounds",
    "output", "seed")
BOUND_DEFAULTS = {"resolvent": 8, "nabla": 5, "omega": 4, "flows": 2,
    "npoint2": 3, "npoint3": 2, "rank_one_xi": 6, "rank_one_x": 8}
MIN_TRUNCATION = 4


# To be populated by argparse from cmdline arguments.
options = None


class ConfigError(Exception):
    pass


class RunConfig(object):
    """Validated contents of one configuration document.

    Public interface:
        self.data:       `InitialData` or None (symbolic runs).
        self.truncation: `Truncation`, installed by `config_load`.
        self.tasks:      list of task names (entries of TASKS).
        self.bounds:     dict, index bounds of the verification suite.
        self.output:     'text' or 'json'.
        self.seed:       seed for the randomized ring checks.
    """
    def __init__(self, data=None, truncation=None, tasks=None, bounds=None,
            output="text", seed=0, label=""):
        self.data = data
        self.truncation = truncation or get_truncation()
        self.tasks = list(tasks) if tasks else list(TASKS)
        self.output = output
        self.seed = seed
        self.label = label
        self.bounds = self._bounds(bounds or {})

    def _bounds(self, given):
        bounds = dict(BOUND_DEFAULTS)
        for key, value in given.items():
            if key not in bounds:
                raise ConfigError("field 'bounds.%s': unknown bound." % key)
            if not _is_int(value) or value < 0:
                raise ConfigError("field 'bounds.%s': must be a non-negative "
                    "integer." % key)
            bounds[key] = value
        if bounds["nabla"] < 2:
            raise ConfigError("field 'bounds.nabla': must be at least 2.")
        return bounds

    def wants_waves(self):
        return any(t in WAVE_TASKS for t in self.tasks)

    def validate(self):
        if self.wants_waves():
            if self.data is None:
                raise ConfigError("Tasks %s need initial data (--data)."
                    % ", ".join(t for t in self.tasks if t in WAVE_TASKS))
            if not self.data.q_invertible():
                raise ConfigError("field 'q': constant term vanishes, but "
                    "wave functions need 1/q (tasks: %s)."
                    % ", ".join(self.tasks))
        return self

    def to_json(self):
        t = self.truncation
        out = {"truncation": {"n_x": t.n_x, "n_xi": t.n_xi,
            "eps_ceiling": t.eps_ceiling}, "tasks": self.tasks,
            "bounds": self.bounds, "output": self.output, "seed": self.seed}
        if self.data is not None:
            out["label"] = self.label
            out.update(self.data.to_json())
        return out


def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def _parse_triples(value, field):
    if not isinstance(value, list):
        raise ConfigError("field '%s': must be a list of [X power, eps power, "
            "\"p/q\"] triples." % field)
    triples = []
    for n, t in enumerate(value):
        where = "%s[%s]" % (field, n)
        if not isinstance(t, list) or len(t) != 3:
            raise ConfigError("field '%s': must be a triple." % where)
        xp, ep, c = t
        if not _is_int(xp) or xp < 0:
            raise ConfigError("field '%s': X power must be a non-negative "
                "integer." % where)
        if not _is_int(ep):
            raise ConfigError("field '%s': eps power must be an integer."
                % where)
        try:
            c = rational(c)
        except (ValueError, ZeroDivisionError) as e:
            raise ConfigError("field '%s': invalid rational: %s" % (where, e))
        triples.append((xp, ep, c))
    return triples


def _parse_truncation(doc):
    tdoc = doc.get("truncation", {})
    if not isinstance(tdoc, dict):
        raise ConfigError("field 'truncation': must be an object.")
    values = {}
    for key in tdoc:
        if key not in ("n_x", "n_xi", "eps_ceiling"):
            raise ConfigError("field 'truncation.%s': unknown field." % key)
        if not _is_int(tdoc[key]):
            raise ConfigError("field 'truncation.%s': must be an integer."
                % key)
        values[key] = tdoc[key]
    for key in ("n_x", "n_xi"):
        if key in values and values[key] < MIN_TRUNCATION:
            raise ConfigError("field 'truncation.%s': must be >= %s."
                % (key, MIN_TRUNCATION))
    return values


def _parse_tasks(value):
    if not isinstance(value, list) or not value:
        raise ConfigError("field 'tasks': must be a non-empty list.")
    tasks = []
    for t in value:
        if t == "verify-all":
            return list(TASKS)
        if t not in TASKS:
            raise ConfigError("field 'tasks': unknown task '%s'." % t)
        if t not in tasks:
            tasks.append(t)
    return tasks


def config_load(path, tasks=None):
    """Read, validate and install the configuration document at `path`.

    `tasks` (if given) replaces the document's task list before validation.
    Truncation orders are installed process-wide before the initial data is
    parsed.
    """
    log.info("Read configuration from '%s'.", path)
    try:
        with open(path, "rb") as f:
            raw = f.read().decode("utf-8")
    except (OSError, IOError, UnicodeDecodeError) as e:
        raise ConfigError("Cannot read '%s': %s" % (path, e))
    try:
        doc = json.loads(raw)
    except ValueError as e:
        raise ConfigError("%s: line %s column %s: %s" % (path,
            getattr(e, "lineno", "?"), getattr(e, "colno", "?"),
            getattr(e, "msg", e)))
    if not isinstance(doc, dict):
        raise ConfigError("%s: top level must be an object." % path)
    for key in doc:
        if key not in CONFIG_FIELDS:
            raise ConfigError("field '%s': unknown field." % key)
    for key in ("q", "r"):
        if key not in doc:
            raise ConfigError("field '%s': missing." % key)

    try:
        truncation = install_truncation(Truncation(**_parse_truncation(doc)))
    except SeriesError as e:
        raise ConfigError("field 'truncation': %s" % e)
    log.info("Truncation: %r", truncation)

    label = doc.get("label", "")
    if not isinstance(label, str):
        raise ConfigError("field 'label': must be a string.")
    q = _parse_triples(doc["q"], "q")
    r = _parse_triples(doc["r"], "r")
    try:
        data = InitialData.from_triples(q, r, label)
    except (SeriesError, DiffPolyError) as e:
        raise ConfigError("field 'q'/'r': %s" % e)

    output = doc.get("output", "text")
    if output not in OUTPUT_MODES:
        raise ConfigError("field 'output': must be one of %s."
            % ", ".join(OUTPUT_MODES))
    seed = doc.get("seed", 0)
    if not _is_int(seed):
        raise ConfigError("field 'seed': must be an integer.")
    bounds = doc.get("bounds", {})
    if not isinstance(bounds, dict):
        raise ConfigError("field 'bounds': must be an object.")
    if tasks is None:
        tasks = _parse_tasks(doc.get("tasks", ["verify-all"]))
    config = RunConfig(data, truncation, tasks, bounds, output, seed, label)
    return config.validate()


class Report(object):
    """Checks, results and notes collected while running one command.

    Public interface:
        self.run(group, func, *args): call a check function and record it.
        self.fail(group, exc):        record the first failure.
        self.results:                 name -> result object (emitted).
        self.notes:                   name -> plain JSON value (emitted).
        self.passed
    """
    def __init__(self, command, config):
        self.command = command
        self.config = config
        self.checks = []
        self.failure = None
        self.results = {}
        self.notes = {}

    @property
    def passed(self):
        return self.failure is None

    def add(self, group, check, seconds=None):
        assert isinstance(check, Check)
        self.checks.append((group, check, seconds))
        log.info("[%s] %s holds (%s)%s", group, check.identity,
            check.window, "" if seconds is None else ", %.3f s" % seconds)

    def run(self, group, func, *args, **kwargs):
        """Run `func`, record the returned Check(s), return any extra value.

        `func` may return a Check, a list of Checks, or a (Check, value)
        tuple.
        """
        t0 = time.time()
        out = func(*args, **kwargs)
        seconds = time.time() - t0
        extra = None
        if isinstance(out, Check):
            checks = [out]
        elif isinstance(out, tuple):
            checks, extra = [out[0]], out[1]
        else:
            checks = list(out)
        for c in checks:
            self.add(group, c, seconds / len(checks))
        return extra

    def fail(self, group, exc):
        identity = getattr(exc, "identity", exc.__class__.__name__)
        where = getattr(exc, "locus", str(exc))
        self.failure = (group, identity, where)
        log.error("[%s] %s violated at %s", group, identity, where)

    def to_json(self):
        out = {"command": self.command,
            "checks": [dict(c.to_json(), group=g) for g, c, _ in self.checks],
            "results": dict((k, _json(v)) for k, v in self.results.items()),
            "notes": self.notes,
            "status": "pass" if self.passed else "fail"}
        out["config"] = self.config.to_json()
        if self.failure is not None:
            g, identity, where = self.failure
            out["failure"] = {"group": g, "identity": identity,
                "locus": where}
        return out

    def to_text(self):
        lines = ["mrkit %s: %s" % (self.command,
            "PASS" if self.passed else "FAIL")]
        data = self.config.data
        if data is not None:
            lines.append("data: %s q = %s, r = %s" % (self.config.label,
                data.q.to_text(), data.r.to_text()))
        lines.append("truncation: %r" % self.config.truncation)
        for g, c, seconds in self.checks:
            lines.append("  pass [%s] %s  (%s)  %.3f s" % (g, c.identity,
                c.window, seconds or 0))
        if self.failure is not None:
            lines.append("  FAIL [%s] %s  at %s" % self.failure)
        for name in sorted(self.results):
            lines.append("")
            lines.append("== %s ==" % name)
            lines.append(_text(self.results[name]))
        if self.notes:
            lines.append("")
            for name in sorted(self.notes):
                lines.append("note: %s: %s" % (name, self.notes[name]))
        return "\n".join(lines)


def _json(obj):
    if hasattr(obj, "to_json"):
        return obj.to_json()
    if isinstance(obj, dict):
        return dict((k, _json(v)) for k, v in obj.items())
    return obj


def _text(obj):
    if hasattr(obj, "to_text"):
        return obj.to_text()
    if isinstance(obj, dict):
        return "\n".join("%s: %s" % (k, _text(v))
            for k, v in sorted(obj.items()))
    return str(obj)


def emit(result, mode="text"):
    """Serialize `result` to bytes; JSON output is byte-stable."""
    if mode == "json":
        s = json.dumps(_json(result), sort_keys=True, indent=2,
            ensure_ascii=False)
    else:
        s = _text(result)
    return (s + "\n").encode("utf-8")


class Workspace(object):
    """Lazily computed objects shared between the checks of one run."""
    def __init__(self, config, fault=None):
        self.config = config
        self.fault = fault
        self.half = Fraction(1, 3) if fault == "recursion" else HALF
        self.cache = {}

    def _get(self, key, build):
        if key not in self.cache:
            log.debug("Build %s.", key)
            self.cache[key] = build()
        return self.cache[key]

    def mr_sym(self, order):
        cur = self.cache.get("mr_sym")
        if cur is None or cur.order < order:
            self.cache["mr_sym"] = mr_coeffs(order, half=self.half)
        return self.cache["mr_sym"]

    def mr_data(self, order):
        cur = self.cache.get("mr_data")
        if cur is None or cur.order < order:
            data = self.config.data
            self.cache["mr_data"] = mr_coeffs(order, data.q, data.r,
                half=self.half)
        return self.cache["mr_data"]

    def flows(self, J):
        cur = self.cache.get("flows")
        if cur is None or cur.order < J:
            self.cache["flows"] = FlowTable(J, self.mr_sym(J + 1))
        return self.cache["flows"]

    def omega_sym(self, bound):
        cur = self.cache.get("omega_sym")
        if cur is None or cur.imax < bound:
            mr = self.mr_sym(2 * bound + 2)
            self.cache["omega_sym"] = omega_table(mr, bound, bound)
        return self.cache["omega_sym"]

    def pair_order(self):
        """Order of the wave pair: n_xi, raised so the k-point tables of
        the npoint task are exact up to their index bounds."""
        order = self.config.truncation.n_xi
        if "npoint" in self.config.tasks:
            b = self.config.bounds
            order = max(order, 2 * (b["npoint2"] + 1), 3 * (b["npoint3"] + 1))
        return order

    def pair(self):
        def build():
            return wave_pair(self.config.data, self.pair_order())
        return self._get("pair", build)

    def fixed_pair(self):
        return self._get("fixed", lambda: pair_fix(self.pair()))


def verify_resolvent(report, ws):
    b = ws.config.bounds
    mr = ws.mr_sym(max(b["resolvent"], 2 * b["omega"] + 2))
    report.run("resolvent", mr_verify, mr)
    report.run("resolvent", leibniz_check, random.Random(ws.config.seed))
    n = b["nabla"]
    report.run("resolvent", nabla_check, n, ws.flows(n - 2),
        mr_coeffs(n, half=ws.half))


def verify_flows(report, ws):
    b = ws.config.bounds
    table = ws.flows(max(b["flows"], 1))
    for j in range(b["flows"] + 1):
        report.run("flows", flow_check, table, j)
    report.run("flows", flows_commute, table, b["flows"])


def verify_omega(report, ws):
    b = ws.config.bounds
    omega = ws.omega_sym(max(b["omega"], 1))
    report.run("omega", omega.check_symmetric)
    literal = report.run("omega", remark_check, omega, ws.mr_sym(
        2 * b["omega"] + 2), b["omega"])
    report.notes["omega_k0_equals_2^k_A_k"] = dict(
        (str(k), v) for k, v in sorted(literal.items()))
    report.run("omega", tau_symmetry, ws.flows(1), omega, 1)
    if ws.config.data is not None:
        mr = ws.mr_data(2 * b["omega"] + 2)
        zero = omega_table(mr, b["omega"], b["omega"])
        report.notes["omega_at_data_zero"] = not any(
            bool(v) for v in zero.entries.values())


def verify_wave(report, ws):
    data = ws.config.data
    b = ws.config.bounds
    pair = ws.pair()
    for kind in ("A", "B"):
        report.run("wave", riccati_check, pair.riccati[kind], data)
    d = wronskian_d(pair)
    report.add("wave", Check("d is X-independent", "xi^1..xi^%s" % d.low))
    fixed = ws.fixed_pair()
    report.add("wave", Check("d = -2 xi", "xi^1..xi^%s" % fixed.d.low))
    report.run("wave", log_derivative_check, fixed)
    report.run("wave", ode_check, fixed)
    report.run("wave", rank_one_check, data, b["rank_one_xi"], b["rank_one_x"],
        ws.half)
    table = report.run("wave", purity_check, fixed, fixed.order - 1)
    for (i, j), v in table.items():
        if i + j <= 3:
            assert_vanishes(v - a_entry_direct(fixed, i, j),
                "A(i,j) from the direct sum", "(%s,%s)" % (i, j))
    report.add("wave", Check("A(i,j) from the direct sum", "i+j <= 3"))
    report.notes["affine_coefficients_zero"] = table.is_zero()
    ws.cache["a_table"] = table


def _a_table(ws):
    if "a_table" not in ws.cache:
        fixed = ws.fixed_pair()
        ws.cache["a_table"] = purity_check(fixed, fixed.order - 1)[1]
    table = ws.cache["a_table"]
    if ws.fault == "a-entry":
        return table.perturbed((0, 0), 1)
    return table


def _kernel_coeff(ws):
    return 2 if ws.fault == "kernel-sign" else -2


def verify_npoint(report, ws):
    data = ws.config.data
    b = ws.config.bounds
    A = _a_table(ws)
    kc = _kernel_coeff(ws)
    b2, b3 = b["npoint2"], b["npoint3"]
    mr = ws.mr_data(max(2 * (b2 + 1), 3 * (b3 + 1), 4))

    two_wave = npoint_wave(A, 2, b2, kc)
    two_mr = npoint_mr(mr, 2, b2)
    two_omega = omega2_as_table(omega_table(mr, b2, b2))
    report.run("npoint", assert_match, two_wave, two_mr,
        "2-point: wave functions = resolvent")
    report.run("npoint", assert_match, two_mr, two_omega,
        "2-point: resolvent = Omega table")
    report.run("npoint", two_wave.check_symmetric)

    three_wave = npoint_wave(A, 3, b3, kc)
    three_mr = npoint_mr(mr, 3, b3)
    oracle = omega3_table(ws.flows(b3), ws.omega_sym(max(b3, 1)), data, b3)
    report.run("npoint", assert_match, three_wave, three_mr,
        "3-point: wave functions = resolvent")
    report.run("npoint", assert_match, three_mr, oracle,
        "3-point: resolvent = eps D(Omega)")
    report.run("npoint", three_wave.check_symmetric)
    report.notes["correlators_zero"] = two_wave.is_zero()

    series3 = npoint_wave_series(A, 3, 1, kc) if b3 >= 1 else None
    try:
        report.results["calibration"] = zhou_calibrate(A,
            omega2_as_table(omega_table(mr, 1, 1)), 1, series3)
    except CalibrationNotFound as e:
        log.info("%s", e)
        report.notes["calibration"] = "not found"


SUITE = (("resolvent", verify_resolvent), ("flows", verify_flows),
    ("omega", verify_omega), ("wave", verify_wave),
    ("npoint", verify_npoint))


def run_verify(config, fault=None):
    """Run the verification tasks of `config` in a fixed order.

    Stops at the first violated identity, which is recorded on the report.
    """
    report = Report("verify", config)
    report.notes["seed"] = config.seed
    ws = Workspace(config, fault)
    for name, func in SUITE:
        if name not in config.tasks:
            continue
        log.info("Task '%s'.", name)
        try:
            func(report, ws)
        except (IdentityViolation, WaveError) as e:
            report.fail(name, e)
            break
    return report


def run_resolvent(config, ws):
    data = config.data
    if options.symbolic or data is None:
        mr = mr_coeffs(options.order, half=ws.half)
    else:
        mr = mr_coeffs(options.order, data.q, data.r, half=ws.half)
    for c in mr_verify(mr):
        log.info("%s holds (%s)", c.identity, c.window)
    return mr


def run_flows(config, ws):
    table = FlowTable(options.order, mr_coeffs(options.order + 1,
        half=ws.half))
    for j in range(options.order + 1):
        c = flow_check(table, j)
        log.info("%s holds (%s)", c.identity, c.window)
    return table


def run_omega(config, ws):
    data = config.data
    order = options.imax + options.jmax + 2
    if data is None:
        mr = mr_coeffs(order, half=ws.half)
    else:
        mr = mr_coeffs(order, data.q, data.r, half=ws.half)
    table = omega_table(mr, options.imax, options.jmax)
    table.check_symmetric()
    return table


def run_wave(config, ws):
    n = options.xi_order or config.truncation.n_xi
    pair = wave_pair(config.data, n)
    for kind in ("A", "B"):
        riccati_check(pair.riccati[kind], config.data)
    return pair_fix(pair)


def run_npoint(config, ws):
    """Return the requested table, or a dict with both tables and their
    comparison for --method both."""
    k, bound = options.k, options.imax
    data = config.data
    out = {}
    if options.method in ("wave", "both"):
        n = max(config.truncation.n_xi, k * (bound + 1))
        fixed = pair_fix(wave_pair(data, n))
        ws.cache["fixed"] = fixed
        out["wave"] = npoint_wave(_a_table(ws), k, bound, _kernel_coeff(ws))
    if options.method in ("mr", "both"):
        mr = mr_coeffs(k * (bound + 1), data.q, data.r, half=ws.half)
        out["mr"] = npoint_mr(mr, k, bound)
    if options.method != "both":
        return out[options.method]
    out["comparison"] = compare(out["mr"], out["wave"])
    return out


COMMANDS = {"resolvent": run_resolvent, "flows": run_flows,
    "omega": run_omega, "wave": run_wave, "npoint": run_npoint}
COMMAND_TASKS = {"resolvent": ["resolvent"], "flows": ["flows"],
    "omega": ["omega"], "wave": ["wave"], "npoint": ["npoint"]}


def main():
    parse_options()
    if options.verbose == 1:
        log.setLevel(logging.INFO)
    elif options.verbose >= 2:
        log.setLevel(logging.DEBUG)
    log.debug("Options namespace:\n%s", options)


    # STAGE I: load and validate the configuration.

    if options.command == "verify":
        tasks = None
        if options.tasks:
            tasks = list(TASKS) if "all" in options.tasks else [
                t for t in TASKS if t in options.tasks]
    else:
        tasks = COMMAND_TASKS[options.command]
    try:
        if options.data is not None:
            config = config_load(options.data, tasks)
        else:
            config = RunConfig(tasks=tasks or ["resolvent", "flows",
                "omega"]).validate()
    except ConfigError as e:
        err("Invalid configuration: %s" % e, 2)
    if options.seed is not None:
        config.seed = options.seed
    mode = "json" if options.json else config.output
    log.info("Tasks: %s, output: %s.", ", ".join(config.tasks), mode)


    # STAGE II: compute and check.

    code = 0
    try:
        if options.command == "verify":
            result = run_verify(config, options.fault)
            if not result.passed:
                code = 1
        else:
            result = COMMANDS[options.command](config,
                Workspace(config, options.fault))
            comparison = result.get("comparison") if isinstance(
                result, dict) else None
            if comparison is not None and not comparison.passed():
                code = 1
    except (IdentityViolation, WaveError) as e:
        err("%s" % e, 1)
    except (NotInvertible, SeriesError) as e:
        err("Cannot compute: %s" % e, 2)


    # STAGE III: emit.

    output = emit(result, mode)
    if options.out is not None:
        try:
            with open(options.out, "wb") as f:
                f.write(output)
        except (OSError, IOError) as e:
            err("Cannot write '%s': %s" % (options.out, e), 2)
        log.info("Wrote %s bytes to '%s'.", len(output), options.out)
    else:
        stdout_write_bytes(output)
    log.info("Exit with code %s.", code)
    sys.exit(code)


def err(s, code=1):
    """Log message `s` with ERROR level and exit with `code`."""
    log.error(s)
    log.info("Exit with code %s.", code)
    sys.exit(code)


def parse_options():
    """Define and parse command line options using argparse."""
    class ExtHelpAction(argparse.Action):
        def __call__(self, parser, namespace, values, option_string=None):
            print(EXTENDED_HELP)
            sys.exit(0)

    # Shared by all subcommands so that options may follow the command.
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--data", action="store", metavar="FILE",
        help="JSON configuration with the initial data q, r.")
    common.add_argument("--out", action="store", metavar="FILE",
        help="Write the result to FILE instead of stdout.")
    common.add_argument("--json", action="store_true",
        help="Emit JSON (overrides the configured output mode).")
    common.add_argument("--seed", action="store", type=int, metavar="N",
        help="Seed for randomized checks (overrides the configuration).")
    common.add_argument("--fault", action="store", choices=FAULTS,
        help="Inject a deliberate error (negative control).")
    common.add_argument('-v', '--verbose', action='count', default=0,
        help=("Control verbosity. Can be specified multiple times for "
            "increasing verbosity level. Levels: error (default), info, "
            "debug.")
        )

    description = __doc__  # Use docstring of *this* module.
    parser = argparse.ArgumentParser(
        prog="mrkit",
        description=description,
        epilog="Version %s" % __version__,
        add_help=False
        )
    parser.add_argument("-h", "--help", action="help",
        help="Show help message and exit."
        )
    parser.add_argument("--extended-help", action=ExtHelpAction, nargs=0,
        help="Show extended help message and exit."
        )
    parser.add_argument("--version", action="version",
        version=__version__, help="Show version information and exit."
        )

    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("resolvent", parents=[common],
        help="Resolvent coefficients A_j, B_j, C_j.")
    p.add_argument("--order", type=int, default=4, metavar="N",
        help="Highest level j (default: 4).")
    p.add_argument("--symbolic", action="store_true",
        help="Work on the jet variables even if --data is given.")

    p = sub.add_parser("flows", parents=[common],
        help="Flows dq/dt_j, dr/dt_j as differential polynomials.")
    p.add_argument("--order", type=int, default=2, metavar="J",
        help="Highest flow index (default: 2).")

    p = sub.add_parser("omega", parents=[common],
        help="Two-point functions Omega_(i,j).")
    p.add_argument("--imax", type=int, default=2, metavar="I")
    p.add_argument("--jmax", type=int, default=2, metavar="J")

    p = sub.add_parser("wave", parents=[common],
        help="Normalized wave function pair at the initial slice.")
    p.add_argument("--xi-order", type=int, metavar="N",
        help="Depth in 1/xi (default: truncation.n_xi).")

    p = sub.add_parser("npoint", parents=[common],
        help="k-point correlation functions at the initial slice.")
    p.add_argument("--k", type=int, default=2, metavar="K",
        help="Number of points, 2 to 4 (default: 2).")
    p.add_argument("--imax", type=int, default=1, metavar="I",
        help="Index bound (default: 1).")
    p.add_argument("--method", choices=("mr", "wave", "both"),
        default="both", help="Which formula to evaluate (default: both).")

    p = sub.add_parser("verify", parents=[common],
        help="Run the verification suite.")
    p.add_argument("tasks", nargs="*", metavar="TASK",
        help="Subset of %s, or all (default: from the configuration)."
            % ", ".join(TASKS))

    global options
    options = parser.parse_args()
    for t in getattr(options, "tasks", None) or []:
        if t not in TASKS + ("all",):
            err("Unknown task '%s' (choose from %s, all)."
                % (t, ", ".join(TASKS)), 2)
    for name in ("order", "imax", "jmax", "xi_order", "k"):
        value = getattr(options, name, None)
        if value is not None and value < 0:
            err("--%s must not be negative." % name.replace("_", "-"), 2)
    if getattr(options, "xi_order", None) is not None and \
            options.xi_order < MIN_TRUNCATION:
        err("--xi-order must be at least %s." % MIN_TRUNCATION, 2)
    if options.command in ("wave", "npoint") and options.data is None:
        err("Command '%s' needs initial data (--data FILE)."
            % options.command, 2)


if __name__ == "__main__":
    main()
