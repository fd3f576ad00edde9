"""Transaction data model and JSON-lines ledger I/O.

A ledger file holds one transaction per line, in ledger order::

    {"t": 1500000000, "coinbase": false,
     "in": [{"a": "addrA", "v": 30}], "out": [{"a": "addrB", "v": 25}, {"a": "addrC", "v": 5}],
     "fee": 0}

An input may instead reference a previous output as ``{"tx": 3, "o": 1}``
(transaction index, output position); it is resolved to ``(address, amount)``
while loading.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .errors import ConservationViolation, DanglingInput, MalformedRecord


@dataclass(frozen=True, slots=True)
class TxOutput:
    address: str
    amount: int


@dataclass(frozen=True, slots=True)
class TxInput:
    address: str
    amount: int


@dataclass(frozen=True, slots=True)
class Transaction:
    index: int
    timestamp: int
    inputs: tuple[TxInput, ...]
    outputs: tuple[TxOutput, ...]
    is_coinbase: bool = False
    fee: int = 0

    @property
    def input_addresses(self) -> list[str]:
        return [i.address for i in self.inputs]

    @property
    def output_addresses(self) -> list[str]:
        return [o.address for o in self.outputs]


@dataclass(frozen=True)
class Ledger:
    transactions: tuple[Transaction, ...]

    def __len__(self) -> int:
        return len(self.transactions)

    def __iter__(self) -> Iterator[Transaction]:
        return iter(self.transactions)

    def __getitem__(self, i) -> Transaction:
        return self.transactions[i]

    def addresses(self) -> set[str]:
        """Every address appearing anywhere, as input or output."""
        seen = set()
        for tx in self.transactions:
            for i in tx.inputs:
                seen.add(i.address)
            for o in tx.outputs:
                seen.add(o.address)
        return seen


@dataclass(frozen=True)
class Violation:
    index: int
    kind: str
    detail: str = ""

    def __str__(self):
        s = f"{self.kind}({self.index})"
        return f"{s}: {self.detail}" if self.detail else s


def first_seen(ledger: Ledger | Iterable[Transaction]) -> dict[str, int]:
    """Map each output address to the index of the first transaction emitting it.

    Order is the ledger index, never the timestamp.
    """
    seen: dict[str, int] = {}
    for tx in ledger:
        idx = tx.index
        for o in tx.outputs:
            if o.address not in seen:
                seen[o.address] = idx
    return seen


def validate(ledger: Ledger) -> list[Violation]:
    """Return one :class:`Violation` per broken ledger invariant (empty when valid)."""
    out: list[Violation] = []
    emitted: set[str] = set()
    for pos, tx in enumerate(ledger.transactions):
        idx = tx.index
        if idx != pos:
            out.append(Violation(pos, "BadIndex", f"expected index {pos}, found {idx}"))
        if not tx.outputs:
            out.append(Violation(idx, "EmptyOutputs"))
        if any(x.amount < 0 for x in tx.inputs) or any(x.amount < 0 for x in tx.outputs):
            out.append(Violation(idx, "NegativeAmount"))
        if tx.fee < 0:
            out.append(Violation(idx, "NegativeFee"))
        if any(not x.address for x in tx.inputs) or any(not x.address for x in tx.outputs):
            out.append(Violation(idx, "EmptyAddress"))
        if tx.is_coinbase:
            if tx.inputs:
                out.append(Violation(idx, "CoinbaseWithInputs"))
        else:
            if not tx.inputs:
                out.append(Violation(idx, "MissingInputs"))
            else:
                total_in = sum(i.amount for i in tx.inputs)
                total_out = sum(o.amount for o in tx.outputs)
                if total_in != total_out + tx.fee:
                    out.append(Violation(
                        idx, "ConservationViolation", f"{total_in} != {total_out} + {tx.fee}"))
        for i in tx.inputs:
            if i.address not in emitted:
                out.append(Violation(idx, "DanglingInput", i.address))
        for o in tx.outputs:
            emitted.add(o.address)
    return out


def _fail(line, reason):
    raise MalformedRecord(line, reason)


def _int_field(obj, key, line, default=None):
    if key not in obj:
        if default is None:
            _fail(line, f"missing field {key!r}")
        return default
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, int):
        _fail(line, f"field {key!r} must be an integer")
    return v


def _io_list(obj, key, line):
    v = obj.get(key, [])
    if not isinstance(v, list):
        _fail(line, f"field {key!r} must be a list")
    return v


def _address(entry, line):
    a = entry.get("a")
    if not isinstance(a, str) or not a:
        _fail(line, "address must be a non-empty string")
    return a


def _amount(entry, line):
    v = entry.get("v")
    if isinstance(v, bool) or not isinstance(v, int):
        _fail(line, "amount must be an integer")
    if v < 0:
        _fail(line, "amount must be non-negative")
    return v


def parse_records(lines: Iterable[str]) -> Ledger:
    """Build a validated :class:`Ledger` from JSON-lines text.

    Blank lines are skipped; line numbers in errors are 1-based file lines.
    """
    txs: list[Transaction] = []
    emitted: set[str] = set()
    for lineno, raw in enumerate(lines, start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(lineno, f"invalid JSON ({exc.msg})") from None
        if not isinstance(obj, dict):
            _fail(lineno, "record must be a JSON object")
        idx = len(txs)
        timestamp = _int_field(obj, "t", lineno, default=0)
        coinbase = obj.get("coinbase", False)
        if not isinstance(coinbase, bool):
            _fail(lineno, "field 'coinbase' must be a boolean")
        fee = _int_field(obj, "fee", lineno, default=0)
        if fee < 0:
            _fail(lineno, "fee must be non-negative")

        inputs = []
        for entry in _io_list(obj, "in", lineno):
            if not isinstance(entry, dict):
                _fail(lineno, "input entries must be objects")
            if "tx" in entry:
                ref, pos = entry.get("tx"), entry.get("o")
                if not isinstance(ref, int) or not isinstance(pos, int) or isinstance(ref, bool):
                    _fail(lineno, "reference inputs need integer 'tx' and 'o'")
                if not 0 <= ref < idx:
                    raise DanglingInput(idx, f"<tx {ref} output {pos}>")
                prev = txs[ref].outputs
                if not 0 <= pos < len(prev):
                    _fail(lineno, f"transaction {ref} has no output {pos}")
                inputs.append(TxInput(prev[pos].address, prev[pos].amount))
            else:
                inputs.append(TxInput(_address(entry, lineno), _amount(entry, lineno)))
        outputs = []
        for entry in _io_list(obj, "out", lineno):
            if not isinstance(entry, dict):
                _fail(lineno, "output entries must be objects")
            outputs.append(TxOutput(_address(entry, lineno), _amount(entry, lineno)))

        if not outputs:
            _fail(lineno, "transaction has no outputs")
        if coinbase and inputs:
            _fail(lineno, "coinbase transaction has inputs")
        if not coinbase and not inputs:
            _fail(lineno, "non-coinbase transaction has no inputs")
        if not coinbase:
            total_in = sum(i.amount for i in inputs)
            total_out = sum(o.amount for o in outputs)
            if total_in != total_out + fee:
                raise ConservationViolation(idx, total_in, total_out, fee)
        for i in inputs:
            if i.address not in emitted:
                raise DanglingInput(idx, i.address)
        for o in outputs:
            emitted.add(o.address)
        txs.append(Transaction(idx, timestamp, tuple(inputs), tuple(outputs), coinbase, fee))
    return Ledger(tuple(txs))


def parse_ledger(path) -> Ledger:
    with open(path, encoding="utf-8") as fh:
        return parse_records(fh)


def _record(tx: Transaction) -> dict:
    return {
        "t": tx.timestamp,
        "coinbase": tx.is_coinbase,
        "in": [{"a": i.address, "v": i.amount} for i in tx.inputs],
        "out": [{"a": o.address, "v": o.amount} for o in tx.outputs],
        "fee": tx.fee,
    }


def dump_records(ledger: Iterable[Transaction]) -> Iterator[str]:
    for tx in ledger:
        yield json.dumps(_record(tx), separators=(",", ":")) + "\n"


def write_ledger(ledger: Iterable[Transaction], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.writelines(dump_records(ledger))


def read_labels(path) -> dict[str, str]:
    """Read a ground-truth CSV with header ``address,user``."""
    labels: dict[str, str] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["address", "user"]:
            raise MalformedRecord(1, "expected header 'address,user'")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) < 2 or not row[0] or not row[1]:
                raise MalformedRecord(lineno, "expected non-empty address and user")
            if row[0] in labels and labels[row[0]] != row[1]:
                raise MalformedRecord(lineno, f"address {row[0]!r} labeled twice")
            labels[row[0]] = row[1]
    return labels


def write_labels(labels: dict[str, str], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["address", "user"])
        for a in sorted(labels):
            w.writerow([a, labels[a]])


def ledger_from_tuples(rows: Sequence[tuple]) -> Ledger:
    """Small-ledger constructor for tests and examples.

    Each row is ``(inputs, outputs)`` or ``(inputs, outputs, fee)`` where inputs
    and outputs are lists of ``(address, amount)``; an empty input list makes
    a coinbase.
    """
    txs = []
    for idx, row in enumerate(rows):
        ins, outs = row[0], row[1]
        fee = row[2] if len(row) > 2 else 0
        txs.append(Transaction(
            idx, idx,
            tuple(TxInput(a, v) for a, v in ins),
            tuple(TxOutput(a, v) for a, v in outs),
            not ins, fee,
        ))
    return Ledger(tuple(txs))
