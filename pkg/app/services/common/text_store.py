"""
Plain-text formats for states, operators, intensity tables, quorums, partner sets and trajectories.

State, density, operator and table files open with a 'spin <two_s>' header; m is written
over 2 ('1/2', '2/2', '-1/2'). Numbers are written with 17 significant digits so files
round-trip exactly. Lines starting with '#' are comments.
"""
from __future__ import annotations

import io
import logging
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from app.exceptions.spin_exceptions import SpinFileError, SpinTomoException
from app.schemas.measurement import Axis, IntensityTable, QuorumKind, QuorumSpec, TableMode
from app.schemas.reconstruction import PartnerSet
from app.schemas.spin import DensityMatrix, GenericOperator, PureState, SpinValue

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
TABLE_COLUMNS = ["k", "theta", "phi", "m", "value"]


def _fmt(value: float) -> str:
    return f"{value:.16e}"


def _read_lines(path: PathLike) -> List[str]:
    """Non-empty, non-comment lines of a file"""
    try:
        with open(path, "r", encoding="utf-8") as f:
            lines = f.read().splitlines()
    except OSError as e:
        raise SpinFileError(message=f"Cannot read {path}: {e.strerror or e}")
    return [line.strip() for line in lines if line.strip() and not line.strip().startswith("#")]


def _write(path: PathLike, text: str):
    try:
        target = Path(path)
        if target.parent and not target.parent.exists():
            target.parent.mkdir(parents=True, exist_ok=True)
        with open(target, "w", encoding="utf-8") as f:
            f.write(text)
    except OSError as e:
        raise SpinFileError(message=f"Cannot write {path}: {e.strerror or e}")
    logger.debug(f"Wrote {path}")


def _m_index(spin: SpinValue, label: str) -> int:
    doubled = 2 * Fraction(label)
    if doubled.denominator != 1:
        raise ValueError(f"invalid m '{label}'")
    index = (spin.two_s - int(doubled)) // 2
    if (spin.two_s - int(doubled)) % 2 or not 0 <= index < spin.dimension():
        raise ValueError(f"m = {label} is not a level of spin {spin.label}")
    return index


def _is_header(line: str) -> bool:
    return line.split()[0] == "spin"


def _header_spin(line: str) -> SpinValue:
    """'spin <two_s>' with two_s a non-negative integer"""
    parts = line.split()
    if len(parts) != 2 or parts[0] != "spin":
        raise ValueError(f"expected 'spin <two_s>' header, got '{line}'")
    try:
        two_s = int(parts[1])
    except ValueError:
        raise ValueError(f"the spin header takes 2s as an integer, got '{parts[1]}'")
    return SpinValue(two_s=two_s)


def _header_line(spin: SpinValue) -> str:
    return f"spin {spin.two_s}"


class TextStore:
    # states

    @staticmethod
    def state_text(psi: PureState, comment: Optional[str] = None) -> str:
        lines = [f"# {comment}"] if comment else []
        lines.append(_header_line(psi.spin))
        for j, amplitude in enumerate(psi.amplitudes):
            lines.append(f"{psi.spin.m_halves(j)} {_fmt(amplitude.real)} {_fmt(amplitude.imag)}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def write_state(path: PathLike, psi: PureState):
        _write(path, TextStore.state_text(psi))

    @staticmethod
    def _parse_state(lines: List[str], source: PathLike) -> PureState:
        try:
            spin = _header_spin(lines[0])
            amplitudes = np.full(spin.dimension(), np.nan, dtype=complex)
            for line in lines[1:]:
                label, real, imag = line.split()
                amplitudes[_m_index(spin, label)] = complex(float(real), float(imag))
        except SpinTomoException:
            raise
        except Exception as e:
            raise SpinFileError(message=f"Malformed state file {source}: {e}")
        if np.any(np.isnan(amplitudes)):
            raise SpinFileError(message=f"State file {source} does not list every m")
        return PureState(spin=spin, amplitudes=amplitudes)

    @staticmethod
    def read_state(path: PathLike) -> PureState:
        lines = _read_lines(path)
        if not lines:
            raise SpinFileError(message=f"State file {path} is empty")
        if any(len(line.split()) == 4 for line in lines[1:]):
            raise SpinFileError(message=f"{path} holds a matrix, a pure state is needed")
        return TextStore._parse_state(lines, path)

    # matrices: density matrices and operators share 'row col Re Im' entries

    @staticmethod
    def matrix_text(spin: SpinValue, matrix: np.ndarray, name: Optional[str] = None) -> str:
        lines = [f"# {name}"] if name else []
        lines.append(_header_line(spin))
        for row in range(matrix.shape[0]):
            for col in range(matrix.shape[1]):
                value = matrix[row, col]
                lines.append(f"{row} {col} {_fmt(value.real)} {_fmt(value.imag)}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def write_density(path: PathLike, rho: DensityMatrix):
        _write(path, TextStore.matrix_text(rho.spin, rho.matrix))

    @staticmethod
    def write_operator(path: PathLike, operator: GenericOperator):
        _write(path, TextStore.matrix_text(operator.spin, operator.matrix, operator.name))

    @staticmethod
    def _parse_matrix(lines: List[str], spin: Optional[SpinValue], source: PathLike) -> Tuple[SpinValue, np.ndarray]:
        """Entries not listed are zero; the header is optional when the spin is known"""
        try:
            if lines and _is_header(lines[0]):
                declared = _header_spin(lines[0])
                if spin is not None and declared.two_s != spin.two_s:
                    raise SpinFileError(message=f"{source} is declared for spin {declared.label}, expected {spin.label}")
                spin, lines = declared, lines[1:]
            if spin is None:
                raise SpinFileError(message=f"{source} does not declare its spin")
            d = spin.dimension()
            matrix = np.zeros((d, d), dtype=complex)
            for line in lines:
                row, col, real, imag = line.split()
                row, col = int(row), int(col)
                if not (0 <= row < d and 0 <= col < d):
                    raise ValueError(f"entry ({row}, {col}) outside a {d}x{d} matrix")
                matrix[row, col] = complex(float(real), float(imag))
        except SpinTomoException:
            raise
        except Exception as e:
            raise SpinFileError(message=f"Malformed matrix file {source}: {e}")
        return spin, matrix

    @staticmethod
    def read_operator(path: PathLike, spin: Optional[SpinValue] = None) -> GenericOperator:
        spin, matrix = TextStore._parse_matrix(_read_lines(path), spin, path)
        return GenericOperator(spin=spin, matrix=matrix, name=Path(path).stem)

    @staticmethod
    def read_density(path: PathLike) -> DensityMatrix:
        """Density file, or a pure-state file promoted to its projector"""
        lines = _read_lines(path)
        if not lines:
            raise SpinFileError(message=f"File {path} is empty")
        if len(lines) > 1 and len(lines[1].split()) == 3:
            return TextStore._parse_state(lines, path).to_density()
        spin, matrix = TextStore._parse_matrix(lines, None, path)
        return DensityMatrix(spin=spin, matrix=matrix)

    # intensity tables

    @staticmethod
    def table_text(table: IntensityTable) -> str:
        lines = [_header_line(table.spin), f"mode {table.mode.value}"]
        if table.mode == TableMode.SAMPLED:
            lines.append(f"shots {table.shots}" + (f" seed {table.seed}" if table.seed is not None else ""))
        lines.append("# axes")
        lines.extend(f"# {k} {_fmt(axis.theta)} {_fmt(axis.phi)}" for k, axis in enumerate(table.axes))
        lines.append("# " + " ".join(TABLE_COLUMNS))
        for k, axis, j, value in table.rows():
            rendered = str(int(value)) if table.mode == TableMode.SAMPLED else _fmt(float(value))
            lines.append(f"{k} {_fmt(axis.theta)} {_fmt(axis.phi)} {table.spin.m_halves(j)} {rendered}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def write_table(path: PathLike, table: IntensityTable):
        _write(path, TextStore.table_text(table))

    @staticmethod
    def read_table(path: PathLike) -> IntensityTable:
        """Rows 'k theta phi m value' after the spin, mode and optional shots lines; a bare column header is skipped"""
        lines = _read_lines(path)
        try:
            spin = _header_spin(lines[0])
            keyword, mode_name = lines[1].split()
            if keyword != "mode":
                raise ValueError(f"expected 'mode exact|sampled', got '{lines[1]}'")
            mode = TableMode(mode_name)
            cursor = 2
            shots = seed = None
            if lines[cursor].split()[0] == "shots":
                parts = lines[cursor].split()
                if len(parts) not in (2, 4) or (len(parts) == 4 and parts[2] != "seed"):
                    raise ValueError(f"expected 'shots <N> [seed <S>]', got '{lines[cursor]}'")
                shots = int(parts[1])
                seed = int(parts[3]) if len(parts) == 4 else None
                cursor += 1
            if mode == TableMode.SAMPLED and shots is None:
                raise ValueError("a sampled table needs a 'shots <N>' line")
            if lines[cursor].split() == TABLE_COLUMNS:
                cursor += 1
            frame = pd.read_csv(
                io.StringIO("\n".join(lines[cursor:])),
                sep=r"\s+",
                header=None,
                names=TABLE_COLUMNS,
                dtype={"m": str},
                float_precision="round_trip",
            )

            axis_count = int(frame["k"].max()) + 1
            d = spin.dimension()
            values = np.full((axis_count, d), np.nan)
            axes: List[Optional[Axis]] = [None] * axis_count
            for row in frame.itertuples(index=False):
                values[int(row.k), _m_index(spin, row.m)] = float(row.value)
                axes[int(row.k)] = Axis(theta=float(row.theta), phi=float(row.phi))
        except SpinTomoException:
            raise
        except Exception as e:
            raise SpinFileError(message=f"Malformed intensity table {path}: {e}")
        if np.any(np.isnan(values)) or any(axis is None for axis in axes):
            raise SpinFileError(message=f"Intensity table {path} is incomplete")

        if mode == TableMode.SAMPLED:
            return IntensityTable.from_counts(spin, axes, np.rint(values).astype(np.int64), shots, seed)
        return IntensityTable(spin=spin, axes=tuple(axes), probabilities=values, mode=mode)

    # quorums

    @staticmethod
    def quorum_text(quorum: QuorumSpec) -> str:
        lines = [f"quorum {quorum.kind.value}"]
        if quorum.kind == QuorumKind.CONE:
            lines.append(f"cone K {quorum.axis_count} theta {_fmt(quorum.opening_angle)}")
        lines.extend(f"axis {_fmt(axis.theta)} {_fmt(axis.phi)}" for axis in quorum.axes)
        return "\n".join(lines) + "\n"

    @staticmethod
    def write_quorum(path: PathLike, quorum: QuorumSpec):
        _write(path, TextStore.quorum_text(quorum))

    @staticmethod
    def read_quorum(path: PathLike) -> QuorumSpec:
        lines = _read_lines(path)
        try:
            head = lines[0].split()
            if head[0] != "quorum":
                raise ValueError(f"expected 'quorum <kind>' header, got '{lines[0]}'")
            kind = QuorumKind(head[1])
            opening_angle = axis_count = None
            axes = []
            for line in lines[1:]:
                parts = line.split()
                if parts[0] == "cone":
                    axis_count, opening_angle = int(parts[2]), float(parts[4])
                elif parts[0] == "axis":
                    axes.append(Axis(theta=float(parts[1]), phi=float(parts[2])))
                else:
                    raise ValueError(f"unexpected line '{line}'")
        except SpinTomoException:
            raise
        except Exception as e:
            raise SpinFileError(message=f"Malformed quorum file {path}: {e}")
        return QuorumSpec(kind=kind, axes=tuple(axes), opening_angle=opening_angle, axis_count=axis_count)

    # partner sets: one state block per candidate, sign pattern in the comment

    @staticmethod
    def partners_text(partners: PartnerSet) -> str:
        blocks = []
        for index, (candidate, signs) in enumerate(zip(partners.candidates, partners.signs)):
            comment = f"partner {index} pattern {PartnerSet.pattern_label(signs)}"
            if partners.selected == index:
                comment += " selected"
            blocks.append(TextStore.state_text(candidate, comment))
        return "\n".join(blocks)

    @staticmethod
    def write_partners(path: PathLike, partners: PartnerSet):
        _write(path, TextStore.partners_text(partners))

    @staticmethod
    def read_partners(path: PathLike) -> List[PureState]:
        lines = _read_lines(path)
        starts = [index for index, line in enumerate(lines) if line.startswith("spin")]
        if not starts:
            raise SpinFileError(message=f"Partner file {path} holds no state")
        bounds = starts[1:] + [len(lines)]
        return [TextStore._parse_state(lines[begin:end], path) for begin, end in zip(starts, bounds)]

    @staticmethod
    def write_text(path: PathLike, text: str):
        _write(path, text)

    # plot-ready frames

    @staticmethod
    def write_frame(path: PathLike, frame: pd.DataFrame, header: Optional[str] = None):
        buffer = io.StringIO()
        if header:
            buffer.write("".join(f"# {line}\n" for line in header.splitlines()))
        frame.to_csv(buffer, sep=" ", index=False, float_format="%.16e")
        _write(path, buffer.getvalue())

    @staticmethod
    def read_frame(path: PathLike) -> pd.DataFrame:
        try:
            return pd.read_csv(path, sep=r"\s+", comment="#", dtype={"m": str}, float_precision="round_trip")
        except OSError as e:
            raise SpinFileError(message=f"Cannot read {path}: {e.strerror or e}")
        except Exception as e:
            raise SpinFileError(message=f"Malformed table file {path}: {e}")


text_store = TextStore()
