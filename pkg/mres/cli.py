import functools
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional

import click

from . import __version__
from .complexity import (check_antisymmetric_property, enumerate_countermodels, map_from_witness, min_dt_size,
                         parity_table)
from .config import load_config
from .diagnostics import (boundary_sets, classify_proof, horn_violations, is_interval, merge_map_embedding, uci,
                          uci_all)
from .errors import ConfigError, MResError
from .families import FamilyId, emit_instance, gen_family, uci_grouping
from .formats.proof import emit_proof, parse_proof
from .formats.qdimacs import parse_qdimacs, read_annotations
from .formats.strategy import emit_strategy, parse_strategy
from .formats.truthtable import emit_truth_tables, parse_truth_table
from .proof import CheckMode, check_proof, check_soundness_invariant, extract_strategy, \
    generate_equality_refutation, strip, verify_countermodel
from .search import SearchCaps, saturation_search

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_ERROR = 2


class AliasedGroup(click.Group):
    """Group with support for command aliases."""

    def __init__(self, *args, **kwargs):
        self.aliases = {}
        super(AliasedGroup, self).__init__(*args, **kwargs)

    def add_alias(self, alias, cmd_name):
        """Add an alias for a command."""
        self.aliases[alias] = cmd_name

    def get_command(self, ctx, cmd_name):
        """Get a command by name, supporting aliases."""
        cmd = super(AliasedGroup, self).get_command(ctx, cmd_name)
        if cmd is not None:
            return cmd
        if cmd_name in self.aliases:
            real_cmd = self.aliases[cmd_name]
            logger.debug(f"Using alias: {cmd_name} -> {real_cmd}")
            return super(AliasedGroup, self).get_command(ctx, real_cmd)
        return None

    def resolve_command(self, ctx, args):
        cmd_name = args[0] if args else ''
        if cmd_name in self.aliases and super(AliasedGroup, self).get_command(ctx, cmd_name) is None:
            args = [self.aliases[cmd_name]] + args[1:]
        return super(AliasedGroup, self).resolve_command(ctx, args)


CONTEXT_SETTINGS = dict(help_option_names=['-h', '--help'])


def emit(**pairs):
    """Print one machine-readable line of key=value pairs."""
    click.echo(" ".join(f"{key}={_fmt(value)}" for key, value in pairs.items()))


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (set, frozenset, list, tuple)):
        return ",".join(str(v) for v in sorted(value)) if value else "-"
    if isinstance(value, dict):
        return ",".join(f"{k}:{v}" for k, v in sorted(value.items())) if value else "-"
    return str(value)


def handle_errors(func):
    """Map library and file errors to exit code 2 with the message on stderr."""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (ValueError, OSError) as e:
            click.echo(f"error: {e}", err=True)
            logger.debug("Command failed", exc_info=True)
            sys.exit(EXIT_ERROR)
    return wrapper


def _read(path: str) -> bytes:
    return Path(path).read_bytes()


def _write(path: Optional[str], text: str):
    if path:
        Path(path).write_text(text)
        logger.info(f"Wrote {path}")
    else:
        click.echo(text, nl=False)


def _load_formula(path: str):
    return parse_qdimacs(_read(path))


def _checked(qbf, proof_path: str, mode: CheckMode = CheckMode.INFER):
    proof = parse_proof(_read(proof_path), qbf)
    return check_proof(qbf, proof, mode)


def _report_failures(report):
    for f in report.failures:
        emit(failure_line="-" if f.line_id is None else f.line_id, kind=f.kind.value, message=repr(f.message))


def _var_list(text: str, qbf) -> List[int]:
    """Comma-separated variable ids or role names from the formula's annotations."""
    roles = read_annotations(qbf).roles
    result: List[int] = []
    for item in (s.strip() for s in text.split(",")):
        if not item:
            continue
        if item.lstrip("-").isdigit():
            result.append(int(item))
        elif item in roles:
            result.extend(roles[item])
        else:
            raise MResError(f"unknown variable or role {item!r}")
    return result


@click.group(cls=AliasedGroup, context_settings=CONTEXT_SETTINGS)
@click.version_option(__version__, '--version', message='%(version)s')
@click.option('--threads', type=int, default=None, help='Worker threads (default: MRES_THREADS or CPU count)')
@click.option('--exhaustive-cap', type=int, default=None, help='Max existential variables for exhaustive checks')
@click.option('--enum-cap', type=int, default=None, help='Max candidate strategies for enumeration')
@click.option('--env-file', type=click.Path(dir_okay=False), default=None, help='Read settings from this .env file')
@click.option('--verbose', is_flag=True, help='Debug logging')
@click.option('--quiet', is_flag=True, help='Warnings and errors only')
@click.pass_context
def cli(ctx, threads, exhaustive_cap, enum_cap, env_file, verbose, quiet):
    """mres: Merge Resolution proofs for QBF

    Generate benchmark formulas, build, check and search for MRes proofs,
    extract and verify countermodels, and run the brute-force
    decision-tree and countermodel oracles.

    Basic usage:
      mres gen --family equality --n 3 --out eq3.qdimacs
      mres prove --family equality --n 3 --out eq3.mres
      mres check --formula eq3.qdimacs --proof eq3.mres
      mres dtsize --parity 4

    Results are printed as key=value lines. Exit codes: 0 success,
    1 negative verdict, 2 usage or input error.
    """
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr)
    logging.getLogger('mres').setLevel(level)
    try:
        ctx.obj = load_config(env_file, threads=threads, exhaustive_cap=exhaustive_cap, enum_cap=enum_cap)
    except ConfigError as e:
        raise click.UsageError(str(e))


@cli.command(short_help="Generate a family instance as QDIMACS")
@click.option('--family', '-f', required=True, type=click.Choice([f.value for f in FamilyId]))
@click.option('--n', 'n', required=True, type=int)
@click.option('--out', '-o', type=click.Path(dir_okay=False), default=None, help='Output file (default: stdout)')
@handle_errors
def gen(family, n, out):
    """Write the n-th member of a formula family with role/group annotations."""
    instance = gen_family(family, n)
    _write(out, emit_instance(instance))
    if out:
        emit(family=family, n=n, vars=instance.qbf.num_vars, clauses=len(instance.qbf.matrix), out=out)


@cli.command(short_help="Build the golden Equality refutation")
@click.option('--family', '-f', default='equality', type=click.Choice(['equality']))
@click.option('--n', 'n', required=True, type=int)
@click.option('--out', '-o', type=click.Path(dir_okay=False), default=None, help='Proof file (default: stdout)')
@click.option('--formula-out', type=click.Path(dir_okay=False), default=None, help='Also write the formula here')
@handle_errors
def prove(family, n, out, formula_out):
    """Emit the 4n+1 line Equality refutation."""
    proof = generate_equality_refutation(n)
    if formula_out:
        _write(formula_out, emit_instance(gen_family(family, n)))
    _write(out, emit_proof(strip(proof), comments=[f"equality refutation n={n}"]))
    if out:
        emit(family=family, n=n, lines=len(proof.lines), out=out)


@cli.command(short_help="Check a proof against a formula")
@click.option('--formula', '-q', required=True, type=click.Path(exists=True, dir_okay=False))
@click.option('--proof', '-p', required=True, type=click.Path(exists=True, dir_okay=False))
@click.option('--strict-choices', is_flag=True, help='Require explicit choices wherever a map is non-trivial')
@click.option('--soundness-invariant', is_flag=True, help='Also check the per-line soundness invariant')
@click.pass_obj
@handle_errors
def check(config, formula, proof, strict_choices, soundness_invariant):
    """Re-derive every proof line and report failures."""
    qbf = _load_formula(formula)
    mode = CheckMode.STRICT if strict_choices else CheckMode.INFER
    report = _checked(qbf, proof, mode)
    stats = report.stats
    emit(status="accepted" if report.ok else "rejected", lines=stats.get("lines", 0),
         axioms=stats.get("axioms", 0), resolutions=stats.get("resolutions", 0), merges=stats.get("merges", 0))
    _report_failures(report)
    if not report.ok:
        sys.exit(EXIT_NEGATIVE)
    if soundness_invariant:
        sound = check_soundness_invariant(qbf, report.proof, config.exhaustive_cap, config.threads)
        emit(soundness_violations=len(sound.failures))
        _report_failures(sound)
        if not sound.ok:
            sys.exit(EXIT_NEGATIVE)


@cli.command(short_help="Extract the countermodel of a checked proof")
@click.option('--formula', '-q', required=True, type=click.Path(exists=True, dir_okay=False))
@click.option('--proof', '-p', required=True, type=click.Path(exists=True, dir_okay=False))
@click.option('--out', '-o', type=click.Path(dir_okay=False), default=None, help='Strategy file (default: stdout)')
@handle_errors
def extract(formula, proof, out):
    """Write the sink's merge maps in strategy format."""
    qbf = _load_formula(formula)
    report = _checked(qbf, proof)
    if not report.ok:
        emit(status="rejected")
        _report_failures(report)
        sys.exit(EXIT_NEGATIVE)
    strategy = extract_strategy(report.proof)
    _write(out, emit_strategy(strategy))
    if out:
        emit(status="extracted", maps=len(strategy), out=out)


@cli.command(name='verify-strategy', short_help="Exhaustively verify a countermodel")
@click.option('--formula', '-q', required=True, type=click.Path(exists=True, dir_okay=False))
@click.option('--strategy', '-s', required=True, type=click.Path(exists=True, dir_okay=False))
@click.pass_obj
@handle_errors
def verify_strategy(config, formula, strategy):
    """Check that every existential play is refuted by the strategy."""
    qbf = _load_formula(formula)
    maps = parse_strategy(_read(strategy))
    result = verify_countermodel(qbf, maps, config.exhaustive_cap, config.threads)
    emit(winning=result.winning, checked=result.checked)
    if not result.winning:
        emit(witness=result.witness)
        sys.exit(EXIT_NEGATIVE)


@cli.command(short_help="Classify a proof's shape")
@click.option('--formula', '-q', required=True, type=click.Path(exists=True, dir_okay=False))
@click.option('--proof', '-p', required=True, type=click.Path(exists=True, dir_okay=False))
@click.option('--regular-vars', default=None, help='Pivot variables for regularity (ids or role names)')
@handle_errors
def classify(formula, proof, regular_vars):
    """Report tree-likeness, regularity and the extracted maps' structure."""
    qbf = _load_formula(formula)
    report = _checked(qbf, proof)
    if not report.ok:
        emit(status="rejected")
        _report_failures(report)
        sys.exit(EXIT_NEGATIVE)
    tracked = _var_list(regular_vars, qbf) if regular_vars else None
    result = classify_proof(report.proof, tracked)
    emit(tree_like=result.tree_like, regular=result.regular, size=result.size,
         horn_violations=len(horn_violations(report.proof)),
         embedding_ok=not merge_map_embedding(report.proof))
    for u, c in result.maps.items():
        emit(map=u, is_tree=c.is_tree, is_read_once=c.is_read_once, map_size=c.size, queried=c.queried_vars)


@cli.command(short_help="UCI sets and boundary sets")
@click.option('--formula', '-q', required=True, type=click.Path(exists=True, dir_okay=False))
@click.option('--proof', '-p', required=True, type=click.Path(exists=True, dir_okay=False))
@click.option('--uci', 'uci_line', default=None, help="Line id, or 'all'")
@click.option('--groups', type=click.Choice(['phi', 'A']), default=None, help='Grouping scheme for --uci')
@click.option('--boundary', default=None, help='Variable set for boundary sets (ids or role names)')
@handle_errors
def diag(formula, proof, uci_line, groups, boundary):
    """Used-constraint index sets (--uci with --groups) or boundary sets (--boundary)."""
    if (uci_line is None) == (boundary is None):
        raise click.UsageError("give exactly one of --uci or --boundary")
    qbf = _load_formula(formula)
    report = _checked(qbf, proof)
    if not report.ok:
        emit(status="rejected")
        _report_failures(report)
        sys.exit(EXIT_NEGATIVE)
    checked = report.proof

    if uci_line is not None:
        if groups is None:
            raise click.UsageError("--uci needs --groups")
        grouping = uci_grouping(read_annotations(qbf), groups)
        if uci_line == 'all':
            sets = uci_all(checked, grouping)
            for line_id, labels in sets.items():
                emit(line=line_id, uci=labels, interval=is_interval(labels))
            emit(intervals=all(is_interval(s) for s in sets.values()))
        else:
            try:
                line_id = int(uci_line)
            except ValueError:
                raise click.UsageError(f"--uci expects a line id or 'all', got {uci_line!r}")
            labels = uci(checked, line_id, grouping)
            emit(line=line_id, uci=labels, interval=is_interval(labels))
        return

    result = boundary_sets(checked, _var_list(boundary, qbf))
    emit(s_prime=result.s_prime, s=result.s, widths=result.widths)


@cli.command(short_help="Minimal decision-tree size")
@click.option('--parity', type=int, default=None, help='Use the parity function on N variables')
@click.option('--table', type=click.Path(exists=True, dir_okay=False), default=None, help='Truth-table file')
@handle_errors
def dtsize(parity, table):
    """Leaf count of a smallest decision tree, with witness depths."""
    if (parity is None) == (table is None):
        raise click.UsageError("give exactly one of --parity or --table")
    f = parity_table(parity) if parity is not None else parse_truth_table(_read(table))
    size, witness = min_dt_size(f)
    depth_min, depth_max = witness.depth_range()
    emit(size=size, witness_depth_min=depth_min, witness_depth_max=depth_max)


@cli.command(name='enum-countermodels', short_help="Enumerate all countermodels")
@click.option('--formula', '-q', required=True, type=click.Path(exists=True, dir_okay=False))
@click.option('--report-min-dt', is_flag=True, help='Also report minimal decision-tree size per table')
@click.option('--limit', type=int, default=None, help='Stop after this many countermodels')
@click.option('--tables', 'tables_out', type=click.Path(dir_okay=False), default=None,
              help='Write every countermodel as truth tables to this file')
@click.option('--out', 'out_dir', type=click.Path(file_okay=False), default=None,
              help='Write countermodel_<k>.strategy files (minimal decision trees) to this directory')
@click.pass_obj
@handle_errors
def enum_countermodels(config, formula, report_min_dt, limit, tables_out, out_dir):
    """List winning strategies as truth tables in enumeration order."""
    qbf = _load_formula(formula)
    if out_dir:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
    blocks: List[str] = []
    count = 0
    for strategy in enumerate_countermodels(qbf, config.enum_cap, config.threads, config.exhaustive_cap):
        maps = {}
        for u, table in strategy.items():
            pairs: Dict[str, object] = dict(countermodel=count, u=u, vars=list(table.vars) or "-",
                                            table=table.bit_string())
            if report_min_dt or out_dir:
                size, witness = min_dt_size(table)
                maps[u] = map_from_witness(u, witness)
            if report_min_dt:
                pairs.update(min_dt=size, witness_depth_min=witness.depth_range()[0])
            emit(**pairs)
        order = sorted(strategy)
        blocks.append(f"c countermodel {count} universals {' '.join(map(str, order))}\n"
                      + emit_truth_tables([strategy[u] for u in order]))
        if out_dir:
            _write(str(Path(out_dir) / f"countermodel_{count}.strategy"), emit_strategy(maps))
        count += 1
        if limit is not None and count >= limit:
            break
    if tables_out:
        _write(tables_out, "".join(blocks))
    emit(count=count)
    if count == 0:
        sys.exit(EXIT_NEGATIVE)


@cli.command(name='check-antisym', short_help="Check the KBKF-lq antisymmetric property")
@click.option('--strategy', '-s', required=True, type=click.Path(exists=True, dir_okay=False))
@click.option('--n', 'n', required=True, type=int)
@handle_errors
def check_antisym(strategy, n):
    """Every antisymmetric prefix must be answered by its d values."""
    holds = check_antisymmetric_property(parse_strategy(_read(strategy)), n)
    emit(antisymmetric=holds)
    if not holds:
        sys.exit(EXIT_NEGATIVE)


@cli.command(short_help="Breadth-first proof search")
@click.option('--formula', '-q', required=True, type=click.Path(exists=True, dir_okay=False))
@click.option('--max-lines', type=int, default=None, help='Line cap (default: MRES_SEARCH_MAX_LINES)')
@click.option('--max-width', type=int, default=None, help='Discard clauses wider than this')
@click.option('--max-map-size', type=int, default=None, help='Discard lines with larger merge maps')
@click.option('--out', '-o', type=click.Path(dir_okay=False), default=None, help='Write the refutation here')
@click.pass_obj
@handle_errors
def search(config, formula, max_lines, max_width, max_map_size, out):
    """Search for a refutation within the caps."""
    qbf = _load_formula(formula)
    config = config.with_overrides(search_max_lines=max_lines, search_max_width=max_width,
                                   search_max_map_size=max_map_size)
    proof = saturation_search(qbf, SearchCaps.from_config(config))
    if proof is None:
        emit(found=False)
        sys.exit(EXIT_NEGATIVE)
    if out:
        _write(out, emit_proof(strip(proof), comments=["found by saturation search"]))
    emit(found=True, lines=len(proof.lines), sink=proof.sink)


cli.add_alias('g', 'gen')
cli.add_alias('p', 'prove')
cli.add_alias('c', 'check')
cli.add_alias('x', 'extract')
cli.add_alias('v', 'verify-strategy')
cli.add_alias('cl', 'classify')
cli.add_alias('d', 'diag')
cli.add_alias('dt', 'dtsize')
cli.add_alias('enum', 'enum-countermodels')
cli.add_alias('s', 'search')

if __name__ == '__main__':
    cli()
