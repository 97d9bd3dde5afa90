"""Command line interface: dpcomp compose | curve | allocate | serve.

All epsilon/delta inputs are decimal strings parsed to exact rationals; JSON
goes to stdout. Exit codes: 0 success, 1 usage or computation error,
2 infeasible delta_g.
"""

from __future__ import annotations

import json
import sys
import time
from fractions import Fraction
from typing import List, Optional

import click

from .api import (
    ComputeOptions,
    allocate_document,
    compose_document,
    curve_rows,
    format_curve_csv,
)
from .numerics import PrecisionConfig, as_fraction
from .parameters import (
    DEFAULT_ENUMERATION_LIMIT,
    DEFAULT_RR_ENUMERATION_LIMIT,
    METHOD_AUTO,
    METHODS,
    DpcompError,
    InfeasibleDeltaError,
)

_METHOD_CHOICES = METHODS + (METHOD_AUTO,)


def _parse_rational(value: str, flag: str) -> Fraction:
    try:
        return as_fraction(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise click.UsageError(f"{flag}: cannot parse {value!r} as a decimal") from exc


def _parse_rational_list(value: str, flag: str) -> List[Fraction]:
    return [_parse_rational(part.strip(), flag) for part in value.split(",") if part.strip()]


@click.group()
@click.option("--precision-bits", default=128, show_default=True, type=int)
@click.option(
    "--enum-limit",
    default=DEFAULT_ENUMERATION_LIMIT,
    show_default=True,
    type=int,
    help="largest k for exhaustive exact composition",
)
@click.option(
    "--rr-enum-limit",
    default=DEFAULT_RR_ENUMERATION_LIMIT,
    show_default=True,
    type=int,
    help="largest k for the 4^k verification oracle",
)
@click.pass_context
def cli(ctx, precision_bits: int, enum_limit: int, rr_enum_limit: int):
    """Privacy budget accountant for composing (epsilon, delta) guarantees."""
    ctx.obj = ComputeOptions(
        precision=PrecisionConfig(precision_bits=precision_bits),
        enumeration_limit=enum_limit,
        rr_enumeration_limit=rr_enum_limit,
    )


@cli.command()
@click.option("--eps", required=True, help="comma-separated epsilon list")
@click.option("--delta", default="0", show_default=True, help="comma list or scalar")
@click.option("--delta-g", "delta_g", default=None)
@click.option("--epsilon-g", "epsilon_g", default=None)
@click.option("--method", default=METHOD_AUTO, type=click.Choice(_METHOD_CHOICES))
@click.option("--eta", default=None, help="accuracy for the approximate method")
@click.option("--delta-prime", default=None, help="slack split for the advanced method")
@click.option("--k", "repeat", default=None, type=int, help="repeat scalar eps/delta k times")
@click.pass_obj
def compose(options, eps, delta, delta_g, epsilon_g, method, eta, delta_prime, repeat):
    """Compose mechanisms into one global (epsilon_g, delta_g) guarantee."""
    epsilons = _parse_rational_list(eps, "--eps")
    deltas = _parse_rational_list(delta, "--delta")
    if repeat is not None:
        if len(epsilons) != 1 or len(deltas) != 1:
            raise click.UsageError("--k repeats scalars; give one eps and one delta")
        epsilons = epsilons * repeat
        deltas = deltas * repeat
    if len(deltas) == 1 and len(epsilons) > 1:
        deltas = deltas * len(epsilons)
    if (delta_g is None) == (epsilon_g is None):
        raise click.UsageError("give exactly one of --delta-g / --epsilon-g")
    started = time.perf_counter()
    doc = compose_document(
        epsilons,
        deltas,
        delta_g=_parse_rational(delta_g, "--delta-g") if delta_g is not None else None,
        epsilon_g=_parse_rational(epsilon_g, "--epsilon-g") if epsilon_g is not None else None,
        method=method,
        eta=_parse_rational(eta, "--eta") if eta is not None else None,
        delta_prime=(
            _parse_rational(delta_prime, "--delta-prime") if delta_prime is not None else None
        ),
        options=options,
    )
    doc["runtime_ms"] = round((time.perf_counter() - started) * 1000.0, 3)
    click.echo(json.dumps(doc))


@cli.command()
@click.option("--eps", required=True, help="per-mechanism epsilon (scalar)")
@click.option("--delta", default="0", show_default=True)
@click.option("--delta-g", "delta_g", required=True)
@click.option("--k-range", "k_range", required=True, help="start:stop:step (stop inclusive)")
@click.option("--methods", required=True, help="comma list, e.g. basic,homogeneous-optimal")
@click.option("--eta", default=None)
@click.option("--delta-prime", default=None)
@click.pass_obj
def curve(options, eps, delta, delta_g, k_range, methods, eta, delta_prime):
    """CSV of epsilon_g versus k for homogeneous mechanisms."""
    rows = curve_rows(
        _parse_rational(eps, "--eps"),
        _parse_rational(delta, "--delta"),
        _parse_rational(delta_g, "--delta-g"),
        _parse_k_range(k_range),
        [m.strip() for m in methods.split(",") if m.strip()],
        eta=_parse_rational(eta, "--eta") if eta is not None else None,
        delta_prime=(
            _parse_rational(delta_prime, "--delta-prime") if delta_prime is not None else None
        ),
        options=options,
    )
    click.echo(format_curve_csv(rows), nl=False)


@cli.command()
@click.option(
    "--stat",
    "stats",
    multiple=True,
    required=True,
    help="name:weight[:delta], repeatable",
)
@click.option("--epsilon-g", "epsilon_g", required=True)
@click.option("--delta-g", "delta_g", required=True)
@click.option("--method", default=METHOD_AUTO, type=click.Choice(_METHOD_CHOICES))
@click.option("--eta", default=None)
@click.pass_obj
def allocate(options, stats, epsilon_g, delta_g, method, eta):
    """Split a global budget across weighted statistics."""
    parsed = []
    for spec in stats:
        parts = spec.split(":")
        if len(parts) not in (2, 3):
            raise click.UsageError(f"--stat {spec!r}: expected name:weight[:delta]")
        parsed.append(
            {
                "name": parts[0],
                "weight": _parse_rational(parts[1], "--stat weight"),
                "delta": _parse_rational(parts[2], "--stat delta") if len(parts) == 3 else Fraction(0),
            }
        )
    doc = allocate_document(
        parsed,
        epsilon_g=_parse_rational(epsilon_g, "--epsilon-g"),
        delta_g=_parse_rational(delta_g, "--delta-g"),
        method=method,
        eta=_parse_rational(eta, "--eta") if eta is not None else None,
        options=options,
    )
    click.echo(json.dumps(doc))


@cli.command()
@click.option("--port", default=None, type=int, help="overrides DPCOMP_PORT")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.pass_obj
def serve(options, port: Optional[int], host: str):
    """Run the HTTP JSON service."""
    import uvicorn

    from .service import ServiceSettings, create_app

    settings = ServiceSettings.from_env(options=options)
    if port is not None:
        settings = settings.replace(port=port)
    uvicorn.run(create_app(settings), host=host, port=settings.port)


def _parse_k_range(spec: str) -> List[int]:
    parts = spec.split(":")
    try:
        if len(parts) == 1:
            return [int(parts[0])]
        if len(parts) == 2:
            start, stop = int(parts[0]), int(parts[1])
            step = 1
        elif len(parts) == 3:
            start, stop, step = (int(p) for p in parts)
        else:
            raise ValueError
    except ValueError:
        raise click.UsageError(f"--k-range {spec!r}: expected start:stop[:step]")
    if step < 1 or stop < start:
        raise click.UsageError(f"--k-range {spec!r}: need stop >= start and step >= 1")
    return list(range(start, stop + 1, step))


def main(argv: Optional[List[str]] = None) -> None:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.UsageError as exc:
        exc.show()
        sys.exit(1)
    except click.ClickException as exc:
        exc.show()
        sys.exit(1)
    except click.Abort:
        sys.exit(130)
    except InfeasibleDeltaError as exc:
        click.echo(
            json.dumps(
                {
                    "error": {
                        "reason": "infeasible_delta",
                        "delta_threshold": float(exc.threshold),
                    }
                }
            )
        )
        sys.exit(2)
    except (DpcompError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
