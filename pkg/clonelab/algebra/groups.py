"""Small finite abelian groups given by Cayley tables."""

from dataclasses import dataclass
from typing import List, Optional, Tuple

from clonelab.errors import ClonelabError


class GroupError(ClonelabError):
    """Raised when a Cayley table violates the abelian group axioms."""
    pass


def prime_power_base(n: int) -> Optional[int]:
    """The prime p with n = p**e (e >= 1), or None."""
    if n < 2:
        return None
    p = 2
    while p * p <= n:
        if n % p == 0:
            break
        p += 1
    else:
        return n
    while n % p == 0:
        n //= p
    return p if n == 1 else None


@dataclass(frozen=True)
class AbelianGroup:
    """An abelian group on {0, ..., order-1} with zero 0 and addition table ``table``."""

    name: str
    table: Tuple[Tuple[int, ...], ...]

    def __post_init__(self) -> None:
        n = len(self.table)
        elements = range(n)
        if n == 0 or any(len(row) != n for row in self.table):
            raise GroupError(f"{self.name}: Cayley table must be square and nonempty")
        for a in elements:
            if self.table[0][a] != a:
                raise GroupError(f"{self.name}: 0 is not the neutral element")
            if 0 not in self.table[a]:
                raise GroupError(f"{self.name}: element {a} has no inverse")
            for b in elements:
                if self.table[a][b] != self.table[b][a]:
                    raise GroupError(f"{self.name}: table is not commutative")
                for c in elements:
                    if self.table[self.table[a][b]][c] != self.table[a][self.table[b][c]]:
                        raise GroupError(f"{self.name}: table is not associative")

    @property
    def order(self) -> int:
        return len(self.table)

    def add(self, a: int, b: int) -> int:
        return self.table[a][b]

    def neg(self, a: int) -> int:
        return self.table[a].index(0)

    def is_prime_power_order(self) -> bool:
        return prime_power_base(self.order) is not None


def cyclic_group(n: int) -> AbelianGroup:
    """Z_n."""
    return AbelianGroup(f"Z{n}", tuple(tuple((a + b) % n for b in range(n)) for a in range(n)))


def direct_product(g: AbelianGroup, h: AbelianGroup) -> AbelianGroup:
    """G x H with (a, b) encoded as a * |H| + b."""
    size = h.order

    def add(x: int, y: int) -> int:
        return g.add(x // size, y // size) * size + h.add(x % size, y % size)

    elements = range(g.order * size)
    return AbelianGroup(f"{g.name}x{h.name}", tuple(tuple(add(x, y) for y in elements) for x in elements))


def small_abelian_groups(max_order: int) -> List[AbelianGroup]:
    """Z2, Z3, Z4 and Z2xZ2 restricted to orders between 2 and ``max_order``."""
    z2 = cyclic_group(2)
    groups = [z2, cyclic_group(3), cyclic_group(4), direct_product(z2, z2)]
    return [g for g in groups if g.order <= max_order]
