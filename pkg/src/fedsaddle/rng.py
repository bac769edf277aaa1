"""Deterministic counter-based RNG streams.

One root seed fans out into one independent Philox stream per
(client, purpose) pair, so the degree of client parallelism can never
change what any client draws.  Stream identity is a pure function of
(root_seed, client_id, purpose), not of creation order.
"""
import numpy as np

# purpose codes; stable across releases because they define stream identity
INIT_BATCH = 0
BATCHES = 1
PROBLEM_GEN = 2
OUTPUT_CHOICE = 3

SERVER_ID = 0x5EED  # pseudo client id for server-side draws


def stream(root_seed, client_id, purpose):
    """Independent Generator for one (client, purpose) pair."""
    ss = np.random.SeedSequence(entropy=(int(root_seed), int(client_id), int(purpose)))
    return np.random.Generator(np.random.Philox(ss))


def client_streams(root_seed, num_clients, purpose):
    return [stream(root_seed, i, purpose) for i in range(num_clients)]


def server_stream(root_seed, purpose):
    return stream(root_seed, SERVER_ID, purpose)
