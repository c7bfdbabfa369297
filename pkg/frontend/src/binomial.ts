// Binomial tail arithmetic for pass-probability displays and tests.

/** P[X >= k] for X ~ Binomial(n, p). */
export function binomialTail(k: number, n: number, p: number): number {
  if (p < 0 || p > 1) throw new Error("p must lie in [0, 1]");
  if (k <= 0) return 1;
  if (k > n) return 0;
  if (p === 0) return 0;
  if (p === 1) return 1;
  if (n > 1000) throw new Error("binomialTail is for game-sized n (<= 1000)");
  const q = 1 - p;
  // sum the pmf below k and complement; double precision is ample for
  // the n values the game ever shows
  let pmf = Math.pow(q, n);
  let below = 0;
  for (let j = 0; j < k; j++) {
    below += pmf;
    pmf *= ((n - j) / (j + 1)) * (p / q);
  }
  return Math.min(1, Math.max(0, 1 - below));
}
