from .rng import make_rng, spawn_generators, spawn_seeds

__all__ = ['make_rng', 'spawn_generators', 'spawn_seeds']
