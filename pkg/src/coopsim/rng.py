"""Fully specified 64-bit LCG so seeded placement is reproducible anywhere."""

MASK64 = (1 << 64) - 1
MULTIPLIER = 6364136223846793005
INCREMENT = 1442695040888963407


class Lcg64:
    """``state = state * 6364136223846793005 + 1442695040888963407 (mod 2**64)``.

    Outputs are the top 31 bits of the advanced state.
    """

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next(self) -> int:
        self.state = (self.state * MULTIPLIER + INCREMENT) & MASK64
        return self.state >> 33

    def randrange(self, n: int) -> int:
        if n < 1:
            raise ValueError("n must be positive")
        return self.next() % n
