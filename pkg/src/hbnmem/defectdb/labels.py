"""Parser for hBN point-defect labels such as ``Ge_NV_N``, ``P_BV_B^{-1}``
or ``C_BC_NC_BC_N-2``.

Grammar (underscores and whitespace between tokens are ignored)::

    label       := constituent+ charge? conformer?
    constituent := species site
    species     := "C-" core | core
    core        := element symbol | "V"
    site        := "B" | "N"
    charge      := "^{" sign digits "}" | "^" sign digits | "+" digits
    conformer   := "-" digits

A bare ``-k`` at the end is always a conformer number; negative charges
need the caret form. ``C-V_N`` style carbon-cluster prefixes are kept
verbatim as the species ``"C-V"``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

ELEMENTS = frozenset(
    """H He Li Be B C N O F Ne Na Mg Al Si P S Cl Ar K Ca Sc Ti V Cr Mn Fe Co Ni Cu
    Zn Ga Ge As Se Br Kr Rb Sr Y Zr Nb Mo Tc Ru Rh Pd Ag Cd In Sn Sb Te I Xe Cs Ba
    La Ce Pr Nd Pm Sm Eu Gd Tb Dy Ho Er Tm Yb Lu Hf Ta W Re Os Ir Pt Au Hg Tl Pb Bi
    Po At Rn Fr Ra Ac Th Pa U Np Pu Am Cm Bk Cf Es Fm Md No Lr Rf Db Sg Bh Hs Mt Ds
    Rg Cn Nh Fl Mc Lv Ts Og""".split()
)
SITES = ("B", "N")
CLUSTER_PREFIX = "C-"


class DefectLabelError(ValueError):
    def __init__(self, message: str, token: str, offset: int):
        super().__init__(f"{message}: {token!r} at offset {offset}")
        self.message = message
        self.token = token
        self.offset = offset


@dataclass(frozen=True)
class DefectLabel:
    constituents: tuple[tuple[str, str], ...]
    charge: int = 0
    conformer: Optional[int] = None

    def __post_init__(self):
        if not self.constituents:
            raise ValueError("a defect label needs at least one constituent")
        for species, site in self.constituents:
            if site not in SITES:
                raise ValueError(f"invalid site {site!r} for {species}")
        if self.conformer is not None and self.conformer < 1:
            raise ValueError(f"conformer must be a positive integer, got {self.conformer}")

    def __str__(self) -> str:
        return serialize_label(self)

    @property
    def species(self) -> tuple[str, ...]:
        return tuple(s for s, _ in self.constituents)


def serialize_label(label: DefectLabel) -> str:
    out = "".join(f"{sp}_{site}" for sp, site in label.constituents)
    if label.charge:
        out += f"^{{{label.charge:+d}}}"
    if label.conformer is not None:
        out += f"-{label.conformer}"
    return out


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip(self):
        while self.pos < len(self.text) and (self.text[self.pos] in "_ \t"):
            self.pos += 1

    def peek(self, n: int = 1) -> str:
        return self.text[self.pos:self.pos + n]

    def at_end(self) -> bool:
        self.skip()
        return self.pos >= len(self.text)

    def digits(self) -> str:
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        return self.text[start:self.pos]


def _read_core(sc: _Scanner) -> str:
    start = sc.pos
    ch = sc.peek()
    if not ch.isupper():
        raise DefectLabelError("expected an element symbol or 'V'", sc.text[start:start + 1] or "<end>", start)
    sym = ch
    if sc.pos + 1 < len(sc.text) and sc.text[sc.pos + 1].islower():
        sym = sc.text[sc.pos:sc.pos + 2]
    sc.pos += len(sym)
    return sym


def _read_constituent(sc: _Scanner) -> tuple[str, str]:
    sc.skip()
    prefix = ""
    if sc.peek(2) == CLUSTER_PREFIX and sc.pos + 2 < len(sc.text) and sc.text[sc.pos + 2].isupper():
        prefix = CLUSTER_PREFIX
        sc.pos += 2
    core_start = sc.pos
    core = _read_core(sc)
    sc.skip()
    start = sc.pos
    site = sc.peek()
    if site not in SITES:
        raise DefectLabelError("invalid site (expected B or N)", site or "<end>", start)
    sc.pos += 1
    # the site is checked first so "X_Q" reports the bad site token
    if core != "V" and core not in ELEMENTS:
        raise DefectLabelError("unknown element", core, core_start)
    return prefix + core, site


def _read_signed(sc: _Scanner, start: int) -> int:
    sign = sc.peek()
    if sign not in "+-" or not sign:
        raise DefectLabelError("malformed charge (missing sign)", sc.text[start:sc.pos + 1], start)
    sc.pos += 1
    num = sc.digits()
    if not num:
        raise DefectLabelError("malformed charge (missing magnitude)", sc.text[start:sc.pos + 1], start)
    return int(num) if sign == "+" else -int(num)


def parse_defect_label(text: str) -> DefectLabel:
    """Parse a label; errors carry the offending token and its UTF-8 byte offset."""
    try:
        return _parse(text)
    except DefectLabelError as exc:
        byte_offset = len(text[:exc.offset].encode("utf-8"))
        if byte_offset == exc.offset:
            raise
        raise DefectLabelError(exc.message, exc.token, byte_offset) from None


def _parse(text: str) -> DefectLabel:
    sc = _Scanner(text)
    constituents = []
    charge = 0
    conformer = None
    while True:
        sc.skip()
        ch = sc.peek()
        if not ch or ch in "^+-":
            break
        if ch.isupper():
            constituents.append(_read_constituent(sc))
            continue
        raise DefectLabelError("unexpected character", ch, sc.pos)
    if not constituents:
        raise DefectLabelError("label has no constituents", text[:1] or "<end>", 0)

    sc.skip()
    if sc.peek() == "^":
        start = sc.pos
        sc.pos += 1
        if sc.peek() == "{":
            sc.pos += 1
            charge = _read_signed(sc, start)
            if sc.peek() != "}":
                raise DefectLabelError("malformed charge (missing '}')", sc.text[start:sc.pos + 1], start)
            sc.pos += 1
        else:
            charge = _read_signed(sc, start)
    elif sc.peek() == "+":
        charge = _read_signed(sc, sc.pos)

    sc.skip()
    if sc.peek() == "-":
        start = sc.pos
        sc.pos += 1
        num = sc.digits()
        if not num or int(num) < 1:
            raise DefectLabelError("malformed conformer number", sc.text[start:sc.pos + 1], start)
        conformer = int(num)

    if not sc.at_end():
        raise DefectLabelError("unexpected trailing text", sc.text[sc.pos:], sc.pos)
    return DefectLabel(tuple(constituents), charge, conformer)
