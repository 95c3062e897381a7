"""
Problem document loader

Reads the sectioned key/value grammar documented in config/README.md:

    [operator]      m, row1..rowm, weights
    [speeds]        D, D0
    [nonlinearity]  c1, c2
    [initial]       modeK = A, beta, z0; A, beta, z0; ...
    [run]           T

Keys are case-insensitive, '#' starts a comment. Every error names the
offending line and field.
"""

import hashlib
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Tuple, Union

from pydantic import ValidationError

from ..errors import ConfigError
from ..models.schemas import GaussianBump, ProblemSpec

logger = logging.getLogger(__name__)

SECTIONS = ('operator', 'speeds', 'nonlinearity', 'initial', 'run')


@dataclass
class _Entry:
    value: str
    line: int


def _tokenize(text: str) -> Dict[str, Dict[str, _Entry]]:
    """Split the document into sections of key → (value, line)."""
    sections: Dict[str, Dict[str, _Entry]] = {}
    current = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue

        if line.startswith('['):
            if not line.endswith(']'):
                raise ConfigError("unterminated section header", line=lineno)
            name = line[1:-1].strip().lower()
            if name not in SECTIONS:
                raise ConfigError(f"unknown section [{name}]", line=lineno)
            if name in sections:
                raise ConfigError(f"duplicate section [{name}]", line=lineno)
            sections[name] = {}
            current = name
            continue

        if '=' not in line:
            raise ConfigError("expected 'key = value'", line=lineno)
        if current is None:
            raise ConfigError("entry outside of any section", line=lineno)

        key, value = (part.strip() for part in line.split('=', 1))
        key = key.lower()
        if not key:
            raise ConfigError("empty key", line=lineno)
        if key in sections[current]:
            raise ConfigError("duplicate key", field=key, line=lineno)
        sections[current][key] = _Entry(value=value, line=lineno)

    return sections


def _number(text: str, field: str, line: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"not a number: '{text}'", field=field, line=line)
    if not math.isfinite(value):
        raise ConfigError(f"non-finite number: '{text}'", field=field, line=line)
    return value


def _numbers(entry: _Entry, field: str, count: int = None) -> List[float]:
    parts = [p.strip() for p in entry.value.split(',')]
    if any(not p for p in parts):
        raise ConfigError("empty list element", field=field, line=entry.line)
    values = [_number(p, field, entry.line) for p in parts]
    if count is not None and len(values) != count:
        raise ConfigError(f"expected {count} values, got {len(values)}", field=field, line=entry.line)
    return values


def _require(section: Dict[str, _Entry], key: str, section_name: str) -> _Entry:
    if key not in section:
        raise ConfigError(f"missing key in [{section_name}]", field=key)
    return section[key]


def _parse_bumps(entry: _Entry, field: str) -> List[GaussianBump]:
    bumps = []
    for chunk in entry.value.split(';'):
        chunk = chunk.strip()
        if not chunk:
            continue
        values = [_number(p.strip(), field, entry.line) for p in chunk.split(',')]
        if len(values) not in (2, 3):
            raise ConfigError("bump needs 'A, beta' or 'A, beta, z0'", field=field, line=entry.line)
        amplitude, beta = values[0], values[1]
        center = values[2] if len(values) == 3 else 0.0
        if not beta > 0.0:
            raise ConfigError("initial data not Gaussian-decaying", field=field, line=entry.line)
        bumps.append(GaussianBump(amplitude=amplitude, beta=beta, center=center))
    return bumps


def load_problem(config_text: str) -> ProblemSpec:
    """
    Parse and validate a problem document.

    Args:
        config_text: Document text in the sectioned grammar

    Returns:
        Validated ProblemSpec

    Raises:
        ConfigError: parse failure or violated invariant, with line/field
    """
    sections = _tokenize(config_text)
    for name in ('operator', 'speeds', 'run'):
        if name not in sections:
            raise ConfigError(f"missing section [{name}]")

    operator = sections['operator']
    m_entry = _require(operator, 'm', 'operator')
    try:
        m = int(m_entry.value)
    except ValueError:
        raise ConfigError(f"state count must be an integer: '{m_entry.value}'", field='m', line=m_entry.line)
    if m < 2:
        raise ConfigError("state count must be at least 2", field='m', line=m_entry.line)

    rows = []
    for i in range(1, m + 1):
        key = f'row{i}'
        rows.append(_numbers(_require(operator, key, 'operator'), key, m))
    for key, entry in operator.items():
        if key not in ('m', 'weights') and not (key.startswith('row') and key[3:].isdigit() and 1 <= int(key[3:]) <= m):
            raise ConfigError("unexpected key in [operator]", field=key, line=entry.line)

    weights = [1.0] * m
    if 'weights' in operator:
        weights = _numbers(operator['weights'], 'weights', m)
        if any(not w > 0.0 for w in weights):
            raise ConfigError("weights must be positive", field='weights', line=operator['weights'].line)

    speeds_section = sections['speeds']
    d_entry = _require(speeds_section, 'd', 'speeds')
    speeds = _numbers(d_entry, 'D', m)
    min_speed = min(abs(d) for d in speeds)
    if 'd0' in speeds_section:
        floor_entry = speeds_section['d0']
        speed_floor = _number(floor_entry.value, 'D0', floor_entry.line)
    else:
        floor_entry = d_entry
        speed_floor = min_speed
    if not speed_floor > 0.0 or min_speed < speed_floor:
        raise ConfigError("speed lower bound violated", field='D', line=floor_entry.line)

    nonlinearity = sections.get('nonlinearity', {})
    c1 = _numbers(nonlinearity['c1'], 'c1', m) if 'c1' in nonlinearity else [0.0] * m
    c2 = _numbers(nonlinearity['c2'], 'c2', m) if 'c2' in nonlinearity else [0.0] * m

    w_modes: Dict[int, List[GaussianBump]] = {}
    for key, entry in sections.get('initial', {}).items():
        if not (key.startswith('mode') and key[4:].isdigit()):
            raise ConfigError("initial entries must be named modeK", field=key, line=entry.line)
        index = int(key[4:])
        if index >= m:
            raise ConfigError(f"mode index {index} exceeds state count {m}", field=key, line=entry.line)
        bumps = _parse_bumps(entry, key)
        if bumps:
            w_modes[index] = bumps

    t_entry = _require(sections['run'], 't', 'run')
    horizon = _number(t_entry.value, 'T', t_entry.line)
    if not horizon > 0.0:
        raise ConfigError("time horizon must be positive", field='T', line=t_entry.line)

    try:
        spec = ProblemSpec(
            m=m, operator=rows, weights=weights, speeds=speeds, speed_floor=speed_floor,
            c1=c1, c2=c2, w_modes=w_modes, horizon=horizon,
        )
    except ValidationError as e:
        raise ConfigError(f"invalid problem: {e}")

    logger.debug(f"Loaded problem: m={m}, D={speeds}, T={horizon}, modes={sorted(w_modes)}")
    return spec


def _fmt(values) -> str:
    return ', '.join(repr(float(v)) for v in values)


def dump_problem(spec: ProblemSpec) -> str:
    """
    Serialize a spec back into the document grammar.

    Floats use shortest round-trip formatting, so load(dump(spec)) == spec
    bit for bit.
    """
    lines = ['[operator]', f'm = {spec.m}']
    for i, row in enumerate(spec.operator, start=1):
        lines.append(f'row{i} = {_fmt(row)}')
    lines.append(f'weights = {_fmt(spec.weights)}')

    lines += ['', '[speeds]', f'D = {_fmt(spec.speeds)}', f'D0 = {spec.speed_floor!r}']
    lines += ['', '[nonlinearity]', f'c1 = {_fmt(spec.c1)}', f'c2 = {_fmt(spec.c2)}']

    lines += ['', '[initial]']
    for index in sorted(spec.w_modes):
        bumps = spec.w_modes[index]
        if bumps:
            terms = '; '.join(_fmt((b.amplitude, b.beta, b.center)) for b in bumps)
            lines.append(f'mode{index} = {terms}')

    lines += ['', '[run]', f'T = {spec.horizon!r}', '']
    return '\n'.join(lines)


def spec_hash(config_text: str) -> str:
    """Content hash recorded in manifests"""
    return hashlib.sha256(config_text.encode('utf-8')).hexdigest()


def load_problem_file(path: Union[str, Path]) -> Tuple[ProblemSpec, str]:
    """Read a document from disk; returns the spec and the raw text."""
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise ConfigError(f"cannot read problem document {path}: {e}")
    spec = load_problem(text)
    logger.info(f"Problem loaded from {path} (m={spec.m}, T={spec.horizon})")
    return spec, text
