"""Independent SplitMix64 + Fisher-Yates reference; writes the golden key files."""
import sys

MASK = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed):
        self.state = seed & MASK

    def next(self):
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        return z ^ (z >> 31)


def keygen(seed, n):
    perm = list(range(n))
    rng = SplitMix64(seed)
    for i in range(n - 1, 0, -1):
        j = rng.next() % (i + 1)
        perm[i], perm[j] = perm[j], perm[i]
    return perm


if __name__ == "__main__":
    out = sys.argv[1]
    for seed, n in ((0, 4096), (12345, 64)):
        with open(f"{out}/keygen_seed{seed}_n{n}.txt", "w") as fh:
            fh.write(" ".join(map(str, keygen(seed, n))) + "\n")
    print("hash(0) =", SplitMix64(0).next())
    print("hash(42) =", SplitMix64(42).next())
