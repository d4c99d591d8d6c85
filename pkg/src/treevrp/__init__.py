"""Approximation-scheme toolkit for depot-rooted vehicle routing on trees."""

from .clustering import (
    Clustering,
    ClusterTree,
    EdgeCluster,
    SmallClusterAssignment,
    assign_small_clusters,
    build_cluster_tree,
    build_clustering,
)
from .dp_capacity import CapacityParams, decide_capacity, ptas_capacity
from .dp_makespan import Configuration, SolverParams, decide, ptas
from .instances import CounterexampleParams, check_cr, gen_counterexample, gen_random
from .oracle import exact_capacitated, exact_makespan, greedy_baseline, verify
from .reassign import Assignment, AssignmentInstance, levels, solve
from .solution import Solution, Tour, load_solution, save_solution
from .tree_model import (
    LOAD_CLIENTS,
    LOAD_LENGTH,
    CondensedTree,
    InstanceError,
    LoadFunction,
    RoutingTree,
    binarize,
    branch_load,
    build_tree,
    condense,
    dist_to_root,
    load_instance,
    save_instance,
    subtree_length,
    tour_cost,
)

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "AssignmentInstance",
    "CapacityParams",
    "Clustering",
    "ClusterTree",
    "CondensedTree",
    "Configuration",
    "CounterexampleParams",
    "EdgeCluster",
    "InstanceError",
    "LoadFunction",
    "LOAD_CLIENTS",
    "LOAD_LENGTH",
    "RoutingTree",
    "SmallClusterAssignment",
    "Solution",
    "SolverParams",
    "Tour",
    "assign_small_clusters",
    "binarize",
    "branch_load",
    "build_cluster_tree",
    "build_clustering",
    "build_tree",
    "check_cr",
    "condense",
    "decide",
    "decide_capacity",
    "dist_to_root",
    "exact_capacitated",
    "exact_makespan",
    "gen_counterexample",
    "gen_random",
    "greedy_baseline",
    "levels",
    "load_instance",
    "load_solution",
    "ptas",
    "ptas_capacity",
    "save_instance",
    "save_solution",
    "solve",
    "subtree_length",
    "tour_cost",
    "verify",
]
