"""Command line interface: ``d2count <command> [options]``.

Exit codes: 0 success, 2 unreadable input or config, 3 precondition
violation, 4 refusal because the requested accuracy is too expensive.
"""
from __future__ import annotations

import json
import sys
from fractions import Fraction
from pathlib import Path

import click

from .boolcount import RegularityTree, count_boolean, count_boolean_regular
from .config import Config, load_config
from .decouple import approximate_decompose, construct_junta
from .errors import FeasibilityError, PreconditionError
from .fileio import ParseError, format_d2p, read_d2p, read_edges
from .gausscount import count_gaussian
from .moments import absolute_moment
from .poly import graph_cut_poly, graph_induced_poly, is_regular
from .report import RunReport, digest_bytes

EXIT_PARSE, EXIT_PRECONDITION, EXIT_FEASIBILITY = 2, 3, 4


class RationalType(click.ParamType):
    name = "rational"

    def convert(self, value, param, ctx):
        if isinstance(value, Fraction):
            return value
        try:
            return Fraction(str(value))
        except (ValueError, ZeroDivisionError):
            self.fail(f"{value!r} is not a rational number", param, ctx)


RATIONAL = RationalType()


class State:
    def __init__(self, trace, report, config, as_json, verbose):
        self.trace = trace
        self.report_path = report
        self.config: Config = load_config(config) if config else Config()
        self.as_json = as_json
        self.verbose = verbose
        self.report: RunReport | None = None

    def start(self, command: str, arguments: dict, inputs: list[Path]):
        data = b"".join(Path(p).read_bytes() for p in inputs if p is not None)
        args = {k: (str(v) if isinstance(v, (Fraction, Path)) else v) for k, v in arguments.items()}
        self.report = RunReport(command, args, digest_bytes(data), self.config.snapshot())

    def finish(self, value: Fraction | None, payload: dict, text: str | None = None):
        if value is not None:
            self.report.set_value(value)
        if self.trace:
            self.report.traces.append(str(self.trace))
        if self.report_path:
            Path(self.report_path).write_text(self.report.to_json())
        if self.as_json:
            out = dict(payload)
            if value is not None:
                out = {"value": str(value), "decimal": float(value), **out}
            click.echo(json.dumps(out, indent=2, sort_keys=True, default=str))
        else:
            click.echo(text if text is not None else f"{float(value):.12g}")
            if self.verbose and payload and text is None:
                click.echo(json.dumps(payload, indent=2, sort_keys=True, default=str))


def _guarded(fn):
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ParseError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_PARSE)
        except FeasibilityError as exc:
            click.echo(f"refused: {exc}", err=True)
            sys.exit(EXIT_FEASIBILITY)
        except (PreconditionError, ValueError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_PRECONDITION)

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _check_floor(state: State, eps: Fraction):
    floor = Fraction(state.config.boolean.eps_floor)
    if eps < floor:
        raise FeasibilityError(
            f"eps={float(eps)} is below the floor {float(floor)}: the regularity tree grows like 2^(1/eps^9)"
        )


def _write_trace(path, header: dict, rows: list[dict]):
    with open(path, "w") as fh:
        fh.write(json.dumps(header, sort_keys=True, default=str) + "\n")
        for r in rows:
            fh.write(json.dumps(r, sort_keys=True, default=str) + "\n")


def _junta_trace_rows(trace) -> tuple[dict, list]:
    header = {"kind": "junta", "exit": trace.exit, "scale": str(trace.scale), "params": trace.params}
    return header, trace.records()


@click.group()
@click.option("--trace", type=click.Path(dir_okay=False), help="Write a JSON-lines trace here.")
@click.option("--report", type=click.Path(dir_okay=False), help="Write a run report (JSON) here.")
@click.option("--config", type=click.Path(dir_okay=False), help="TOML file with calibrated constants.")
@click.option("--json", "as_json", is_flag=True, help="Print results as JSON.")
@click.option("--verbose", is_flag=True, help="Include per-stage details.")
@click.pass_context
@_guarded
def main(ctx, trace, report, config, as_json, verbose):
    """Deterministic approximate counting for degree-2 threshold functions."""
    ctx.obj = State(trace, report, config, as_json, verbose)


eps_option = click.option("--eps", type=RATIONAL, required=True, help="Additive accuracy, e.g. 0.1 or 1/10.")
poly_arg = click.argument("file", type=click.Path(exists=True, dir_okay=False, path_type=Path))


@main.command()
@eps_option
@poly_arg
@click.pass_obj
@_guarded
def gaussian(state: State, eps, file):
    """Pr[p(x) >= 0] for x ~ N(0, I_n)."""
    p = read_d2p(file)
    state.start("gaussian", {"eps": eps, "file": file}, [file])
    cfg = state.config
    info: dict = {}
    with state.report.stage("count_gaussian"):
        v = count_gaussian(p, eps, cfg.count, cfg.junta, cfg.spectral, info)
    trace = info.pop("trace", None)
    if state.trace and trace is not None:
        _write_trace(state.trace, *_junta_trace_rows(trace))
    state.finish(v, {"info": info} if state.verbose else {})


@main.command()
@eps_option
@click.option("--dump-tree", type=click.Path(dir_okay=False), help="Write the regularity tree leaves (JSON lines).")
@poly_arg
@click.pass_obj
@_guarded
def boolean(state: State, eps, dump_tree, file):
    """Pr[p(x) >= 0] for x uniform on {-1,1}^n."""
    _check_floor(state, eps)
    p = read_d2p(file)
    state.start("boolean", {"eps": eps, "file": file}, [file])
    cfg = state.config
    info: dict = {}
    with state.report.stage("count_boolean"):
        v = count_boolean(p, eps, cfg.boolean, cfg.count, cfg.junta, cfg.spectral, info)
    tree: RegularityTree = info.pop("tree")
    if dump_tree:
        rows = tree.dump()
        _write_trace(dump_tree, {"kind": "tree", "params": tree.params.snapshot()}, rows)
    if state.trace:
        _write_trace(state.trace, {"kind": "boolean", "params": tree.params.snapshot()}, [info])
    state.finish(v, {"info": info} if state.verbose else {})


@main.command()
@eps_option
@click.option("--tau", type=RATIONAL, default=None, help="Regularity level to require (default c_tau * eps^9).")
@poly_arg
@click.pass_obj
@_guarded
def regular(state: State, eps, tau, file):
    """Fast path for a regular p: a single Gaussian count."""
    p = read_d2p(file)
    state.start("regular", {"eps": eps, "tau": tau, "file": file}, [file])
    cfg = state.config
    with state.report.stage("count_boolean_regular"):
        v = count_boolean_regular(p, eps, tau, cfg.boolean, cfg.count, cfg.junta, cfg.spectral)
    state.finish(v, {})


@main.command()
@click.option("-k", "k", type=int, required=True, help="Moment order.")
@eps_option
@poly_arg
@click.pass_obj
@_guarded
def moment(state: State, k, eps, file):
    """E|q(x)|^k over {-1,1}^n for q = p / ||p||_2."""
    p = read_d2p(file)
    state.start("moment", {"k": k, "eps": eps, "file": file}, [file])
    cfg = state.config
    with state.report.stage("absolute_moment"):
        res = absolute_moment(p, k, eps, cfg.moments, cfg.boolean, cfg.count, detail=state.verbose)
    payload = {
        "norm_sq": str(res.norm_sq),
        "unnormalized_estimate": res.unnormalized,
        "params": res.params,
    }
    if state.verbose:
        payload["buckets"] = res.buckets
    state.report.result["unnormalized_estimate"] = res.unnormalized
    state.finish(res.value, payload)


def _graph_fraction(state: State, kind: str, graph, threshold, eps, method, tau):
    _check_floor(state, eps)
    edges, n = read_edges(graph)
    state.start(kind, {"graph": graph, "threshold": threshold, "eps": eps, "method": method, "tau": tau}, [graph])
    base = graph_cut_poly(edges, n) if kind == "cut-fraction" else graph_induced_poly(edges, n)
    # integer-valued statistic, so ">= T" is the same as ">= T - 1/2"
    p = base - (threshold - Fraction(1, 2))
    cfg = state.config
    if tau is None:
        tau = Fraction(cfg.boolean.c_tau) * eps**9
    if method == "auto":
        method = "regular" if is_regular(p, tau) else "boolean"
    with state.report.stage(method):
        if method == "regular":
            v = count_boolean_regular(p, eps, tau, cfg.boolean, cfg.count, cfg.junta, cfg.spectral)
        else:
            v = count_boolean(p, eps, cfg.boolean, cfg.count, cfg.junta, cfg.spectral)
    state.report.result["method"] = method
    state.finish(v, {"method": method, "vertices": n, "edges": len(edges)})


graph_options = [
    click.option("--graph", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True),
    click.option("--threshold", type=RATIONAL, required=True),
    eps_option,
    click.option("--method", type=click.Choice(["auto", "regular", "boolean"]), default="auto"),
    click.option("--tau", type=RATIONAL, default=None, help="Regularity level for the fast path."),
]


def _with_graph_options(fn):
    for opt in reversed(graph_options):
        fn = opt(fn)
    return fn


@main.command("cut-fraction")
@_with_graph_options
@click.pass_obj
@_guarded
def cut_fraction(state: State, graph, threshold, eps, method, tau):
    """Fraction of the 2^n vertex bipartitions that cut at least THRESHOLD edges."""
    _graph_fraction(state, "cut-fraction", graph, threshold, eps, method, tau)


@main.command("induced-fraction")
@_with_graph_options
@click.pass_obj
@_guarded
def induced_fraction(state: State, graph, threshold, eps, method, tau):
    """Fraction of vertex subsets that induce at least THRESHOLD edges."""
    _graph_fraction(state, "induced-fraction", graph, threshold, eps, method, tau)


@main.command()
@eps_option
@click.option("--eta", type=RATIONAL, required=True)
@poly_arg
@click.pass_obj
@_guarded
def decompose(state: State, eps, eta, file):
    """Split the top eigen-direction off p (variable 1 of r is the new y)."""
    p = read_d2p(file)
    state.start("decompose", {"eps": eps, "eta": eta, "file": file}, [file])
    with state.report.stage("approximate_decompose"):
        res = approximate_decompose(p, eps, eta, state.config.spectral)
    payload = {"kind": res.kind}
    if res.is_split:
        payload.update(lambda1=str(res.lambda1), mu1=str(res.mu1), r=format_d2p(res.r))
    if res.eigen is not None:
        payload["eigen"] = res.eigen.diagnostics
    state.report.result = {"kind": res.kind, **{k: v for k, v in payload.items() if k != "eigen"}}
    state.finish(None, payload, json.dumps(payload, indent=2, sort_keys=True, default=str))


@main.command()
@eps_option
@poly_arg
@click.pass_obj
@_guarded
def junta(state: State, eps, file):
    """Reduce p to a decoupled polynomial sum_i (l_i y_i^2 + m_i y_i) + C."""
    p = read_d2p(file)
    state.start("junta", {"eps": eps, "file": file}, [file])
    with state.report.stage("construct_junta"):
        q, trace = construct_junta(p, eps, state.config.junta, state.config.spectral)
    payload = {
        "K": q.K,
        "lambdas": [str(v) for v in q.lambdas],
        "mus": [str(v) for v in q.mus],
        "constant": str(q.constant),
        "exit": trace.exit,
    }
    if state.trace:
        _write_trace(state.trace, *_junta_trace_rows(trace))
    state.report.result = dict(payload)
    state.finish(None, payload, json.dumps(payload, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
