"""Seeded synthetic ledgers whose address ownership is known exactly.

Generation is a single pass over transaction slots ``t = 0 .. txs-1``, all
randomness drawn from one :class:`~btcreid.rng.SplitMix64` stream in the
order listed below.

* Slot ``t`` is a coinbase when ``t % coinbase_every == 0``: draw the
  miner ``below(users)``, the reward ``between(amount_min, amount_max)``,
  then the receiving address (see *address choice*).
* Otherwise it is a payment:

  1. payer = ``funded[below(len(funded))]`` where ``funded`` lists users
     holding unspent outputs, in the order they became funded (a user
     that runs dry is removed by moving the last entry into its slot);
  2. amount = ``min(between(amount_min, amount_max), payer balance)``;
  3. fan-out ``k = 1 + below(fanout_max)``, capped at ``users - 1`` and at
     the amount (with a single user, the payer pays itself, ``k = 1``);
  4. recipients: repeat ``below(users)``, skipping the payer and duplicates,
     until ``k`` users are picked;
  5. inputs: the payer's unspent outputs sorted by amount descending, then
     creation order, taken until the amount is covered;
  6. split: each recipient gets 1 plus a share of ``amount - k`` cut at
     ``k - 1`` sorted draws of ``below(amount - k + 1)``;
  7. one address per recipient (see *address choice*);
  8. change ``= inputs - amount``; if positive, ``random() < change_prob``
     sends it to a fresh one-time address, else to a reused address of the
     payer (a fresh reusable one if the payer has none). Change is the
     last output.

* *Address choice* for a receiving user: if the user owns reusable
  addresses and ``random() < addr_reuse_prob`` the address is
  ``owned[below(len(owned))]``, otherwise a fresh reusable address.
  The probability draw happens only when the user owns reusable addresses.

Fresh addresses are named ``a<counter>`` in creation order; users are
labeled ``u<index>``. Fees are always zero; timestamps are
``1231006505 + 600 * t``.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import asdict, dataclass
from typing import Optional

from .errors import InfeasibleConfig, UsageError
from .evalkit import GroundTruth
from .ledger import Ledger, Transaction, TxInput, TxOutput
from .rng import SplitMix64

GENESIS_TIME = 1231006505


@dataclass(frozen=True)
class SimConfig:
    seed: int = 0
    users: int = 90
    txs: int = 5000
    addr_reuse_prob: float = 0.1
    change_prob: float = 0.8
    fanout_max: int = 3
    coinbase_every: int = 10
    amount_min: int = 1
    amount_max: int = 1000

    def __post_init__(self):
        if self.users < 1:
            raise UsageError("users must be at least 1")
        if self.txs < 1:
            raise UsageError("txs must be at least 1")
        if self.fanout_max < 1:
            raise UsageError("fanout_max must be at least 1")
        if self.coinbase_every < 1:
            raise UsageError("coinbase_every must be at least 1")
        for name in ("addr_reuse_prob", "change_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise UsageError(f"{name} must lie in [0, 1]")
        if not 1 <= self.amount_min <= self.amount_max:
            raise UsageError("need 1 <= amount_min <= amount_max")
        if not 0 <= self.seed < 2**64:
            raise UsageError("seed must be a 64-bit unsigned integer")

    def to_dict(self) -> dict:
        return asdict(self)


class _Funded:
    """Users holding spendable outputs; O(1) add/remove, deterministic order."""

    def __init__(self):
        self.items: list[int] = []
        self.pos: dict[int, int] = {}

    def __len__(self):
        return len(self.items)

    def add(self, u):
        if u not in self.pos:
            self.pos[u] = len(self.items)
            self.items.append(u)

    def discard(self, u):
        i = self.pos.pop(u, None)
        if i is None:
            return
        last = self.items.pop()
        if i < len(self.items):
            self.items[i] = last
            self.pos[last] = i


def generate(config: SimConfig) -> tuple[Ledger, GroundTruth]:
    if config.coinbase_every > config.txs:
        raise InfeasibleConfig(
            f"coinbase_every={config.coinbase_every} exceeds txs={config.txs}: "
            "the ledger would never be funded beyond its opening slot")
    rng = SplitMix64(config.seed)
    users = config.users
    owner: list[int] = []                      # address counter -> user
    reusable: list[list[str]] = [[] for _ in range(users)]
    utxos: list[list[tuple[int, int, str]]] = [[] for _ in range(users)]  # (amount, serial, address)
    funded = _Funded()
    serial = 0
    txs: list[Transaction] = []

    def fresh(user: int, reuse: bool) -> str:
        addr = f"a{len(owner)}"
        owner.append(user)
        if reuse:
            reusable[user].append(addr)
        return addr

    def receive_address(user: int) -> str:
        owned = reusable[user]
        if owned and rng.random() < config.addr_reuse_prob:
            return owned[rng.below(len(owned))]
        return fresh(user, True)

    def credit(user: int, addr: str, amount: int):
        nonlocal serial
        utxos[user].append((amount, serial, addr))
        serial += 1
        funded.add(user)

    for t in range(config.txs):
        ts = GENESIS_TIME + 600 * t
        if t % config.coinbase_every == 0:
            miner = rng.below(users)
            reward = rng.between(config.amount_min, config.amount_max)
            addr = receive_address(miner)
            credit(miner, addr, reward)
            txs.append(Transaction(t, ts, (), (TxOutput(addr, reward),), True, 0))
            continue

        payer = funded.items[rng.below(len(funded))]
        wallet = utxos[payer]
        balance = sum(u[0] for u in wallet)
        amount = min(rng.between(config.amount_min, config.amount_max), balance)
        k = 1 + rng.below(config.fanout_max)
        if users == 1:
            recipients = [payer]
        else:
            k = min(k, users - 1, amount)
            recipients = []
            while len(recipients) < k:
                r = rng.below(users)
                if r != payer and r not in recipients:
                    recipients.append(r)

        wallet.sort(key=lambda u: (-u[0], u[1]))
        covered = 0
        n_in = 0
        while covered < amount:
            covered += wallet[n_in][0]
            n_in += 1
        spent, utxos[payer] = wallet[:n_in], wallet[n_in:]
        if not utxos[payer]:
            funded.discard(payer)

        k = len(recipients)
        spare = amount - k
        cuts = sorted(rng.below(spare + 1) for _ in range(k - 1))
        bounds = [0] + cuts + [spare]
        shares = [1 + bounds[i + 1] - bounds[i] for i in range(k)]

        outputs = []
        for r, share in zip(recipients, shares):
            addr = receive_address(r)
            outputs.append(TxOutput(addr, share))
        change = covered - amount
        if change > 0:
            if rng.random() < config.change_prob:
                addr = fresh(payer, False)
            else:
                owned = reusable[payer]
                addr = owned[rng.below(len(owned))] if owned else fresh(payer, True)
            outputs.append(TxOutput(addr, change))
        for r, o in zip(recipients + [payer], outputs):
            credit(r, o.address, o.amount)
        inputs = tuple(TxInput(a, v) for v, _, a in spent)
        txs.append(Transaction(t, ts, inputs, tuple(outputs), False, 0))

    labels = {f"a{i}": f"u{u}" for i, u in enumerate(owner)}
    return Ledger(tuple(txs)), GroundTruth(labels)


def describe(ledger: Ledger, gt: Optional[GroundTruth] = None) -> dict:
    """Headline counts for a ledger and its labels."""
    per_user = Counter(gt.labels.values()) if gt is not None and len(gt) else Counter()
    return {
        "transactions": len(ledger),
        "addresses": len(ledger.addresses()),
        "labeled_addresses": len(gt) if gt is not None else 0,
        "users": len(per_user),
        "max_addresses_per_user": max(per_user.values(), default=0),
        "singleton_users": sum(1 for c in per_user.values() if c == 1),
    }
