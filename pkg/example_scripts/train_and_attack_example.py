"""
Train SAC and SA-SAC on a week of synthetic days and compare them under ITDSA.

Short runs only: the point is the workflow, not converged policies. Use
``iesguard matrix`` for the full experiment.
"""
from iesguard import (
    Adversary, AdversaryBudget, IesEnv, SystemParams, TrainerConfig, evaluate, generate_profiles, logger, train,
)


def run(algorithm: str, profiles, params, seed: int):
    cfg = TrainerConfig(algorithm=algorithm, episodes=40, batch_size=64, learning_starts=240, hidden=[64, 64])
    result = train(lambda: IesEnv(profiles, params, seed=seed), cfg, seed)
    policy = result.checkpoint.policy

    env = IesEnv(profiles, params, seed=seed)
    clean = evaluate(policy, env, len(profiles), seed=seed, label=f"{algorithm}-clean").summary
    adversary = Adversary('itdsa', AdversaryBudget(epsilon=1.0), params.itdsa, params.building, policy, seed=seed)
    attacked = evaluate(policy, env, len(profiles), adversary, seed=seed, label=f"{algorithm}-itdsa").summary
    return clean, attacked


def main():
    profiles = generate_profiles(7, seed=0)
    params = SystemParams().for_scenario(1)
    seed = 0

    print("=== Training ===")
    results = {}
    for algorithm in ('sac', 'sa-sac'):
        logger.info(f"training {algorithm}")
        results[algorithm] = run(algorithm, profiles, params, seed)

    # ------------------------------------------------------------------
    print("\n=== Weekly net profit (CNY) ===")
    print(f"{'algorithm':<10} {'clean':>12} {'ITDSA':>12} {'drop %':>8}")
    for algorithm, (clean, attacked) in results.items():
        drop = 100.0 * (clean['profit'] - attacked['profit']) / abs(clean['profit'])
        print(f"{algorithm:<10} {clean['profit']:>12.2f} {attacked['profit']:>12.2f} {drop:>8.2f}")

    # ------------------------------------------------------------------
    print("\n=== Purchases and penalties under attack ===")
    for algorithm, (_, attacked) in results.items():
        print(f"{algorithm}: electricity {attacked['elec_cost']:.2f}, gas {attacked['gas_cost']:.2f}, "
              f"c1 {attacked['c1']:.2f}, c2 {attacked['c2']:.2f}, flags {attacked['violations']}")


if __name__ == "__main__":
    main()
