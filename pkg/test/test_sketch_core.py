import unittest
from collections import Counter
from itertools import combinations, product

import numpy as np

from exact_stream import ConfigurationError, RangeError, InputError, DimensionError, ContractError
from exact_stream.sketch_core import (MERSENNE_31, new_four_wise_hash, derive_seed, is_prime, jl_rows, _signs,
    SignSketch, MemoryLedger, sketch_update, sketch_update_many, sketch_row_update, sketch_rows_update,
    sketch_norm_sq, memory_words, snapshot, sign_matrix)

def all_coefficients(p):
    return np.array(list(product(range(p),repeat=4)),dtype=np.int64)

class TestFourWiseHash(unittest.TestCase):
    def test_same_seed_same_signs(self):
        h1 = new_four_wise_hash(7)
        h2 = new_four_wise_hash(7)
        self.assertEqual(h1,h2)
        indices = np.arange(1000)
        self.assertTrue(np.array_equal(_signs(h1.coefficients,indices,MERSENNE_31),_signs(h2.coefficients,indices,MERSENNE_31)))
        self.assertNotEqual(new_four_wise_hash(8).coefficients,h1.coefficients)

    def test_signs_are_plus_minus_one(self):
        h = new_four_wise_hash(3)
        signs = _signs(h.coefficients,np.arange(20000),MERSENNE_31)
        self.assertTrue(set(np.unique(signs)) <= {-1.0,1.0})
        self.assertLess(abs(signs.mean()),0.05)
        self.assertIn(h.sign(12345),(-1,1))

    def test_modulus_must_be_prime(self):
        with self.assertRaises(ConfigurationError):
            new_four_wise_hash(0,prime_modulus=15)
        with self.assertRaises(ConfigurationError):
            new_four_wise_hash(0,prime_modulus=2**31 + 11)
        self.assertTrue(is_prime(MERSENNE_31))
        self.assertTrue(is_prime(5))
        self.assertFalse(is_prime(1))
        self.assertFalse(is_prime(561))

    def test_index_range(self):
        h = new_four_wise_hash(1)
        with self.assertRaises(RangeError):
            h.sign(-1)
        with self.assertRaises(RangeError):
            h.sign(MERSENNE_31)

    def test_small_prime_enumeration(self):
        # over all p^4 coefficient vectors the values on 4 distinct points are
        # uniform, so a pattern with j plus signs appears 3^j * 2^(4-j) times
        signs = _signs(all_coefficients(5),np.arange(4),5)
        self.assertEqual(signs.shape,(625,4))
        patterns = Counter(tuple(int(s) for s in row) for row in signs)
        self.assertEqual(len(patterns),16)
        for pattern, count in patterns.items():
            plus = pattern.count(1)
            self.assertEqual(count,3**plus * 2**(4 - plus))

    def test_small_prime_every_index_set(self):
        coefficients = all_coefficients(5)
        for indices in combinations(range(5),4):
            signs = _signs(coefficients,np.array(indices),5)
            patterns = Counter(tuple(int(s) for s in row) for row in signs)
            self.assertEqual(len(patterns),16)
            for pattern, count in patterns.items():
                plus = pattern.count(1)
                self.assertEqual(count,3**plus * 2**(4 - plus))

    def test_derive_seed(self):
        self.assertEqual(derive_seed(5,1),derive_seed(5,1))
        self.assertNotEqual(derive_seed(5,1),derive_seed(5,2))
        self.assertNotEqual(derive_seed(5),derive_seed(6))

class TestSignSketch(unittest.TestCase):
    def test_linearity(self):
        x_idx, x_w = [1,5,9], [2.0,-1.0,0.5]
        y_idx, y_w = [5,9,11], [1.0,3.0,-4.0]
        a = SignSketch(20,seed=1)
        b = SignSketch(20,seed=1)
        sketch_update_many(a,x_idx,x_w)
        sketch_update_many(a,y_idx,y_w)
        sketch_update_many(b,[1,5,9,11],[2.0,0.0,3.5,-4.0])
        self.assertTrue(np.allclose(a.image,b.image))

    def test_single_updates_match_batch(self):
        a = SignSketch(30,seed=4)
        b = SignSketch(30,seed=4)
        for i in range(1,40):
            sketch_update(a,i % 7 + 1)
        sketch_update_many(b,[i % 7 + 1 for i in range(1,40)])
        self.assertTrue(np.allclose(a.image,b.image))
        self.assertEqual(a.items_seen,39)
        self.assertEqual(b.items_seen,39)

    def test_whole_weights_count_as_items(self):
        sk = SignSketch(10,seed=0)
        sketch_update_many(sk,[3,4,5],[3.0,1.0,0.5])
        self.assertEqual(sk.items_seen,4)
        sketch_update(sk,3,-1.0)
        self.assertEqual(sk.items_seen,4)

    def test_norm_of_sparse_vectors(self):
        rows = jl_rows(0.3,0.1)
        rng = np.random.default_rng(5)
        inside = 0
        for seed in range(20):
            indices = rng.choice(10**6,size=10,replace=False)
            x = rng.normal(size=10)
            truth = float(np.dot(x,x))
            sk = SignSketch(rows,seed=seed)
            sketch_update_many(sk,indices,x)
            inside += abs(sketch_norm_sq(sk) - truth) <= 0.3 * truth
        self.assertGreaterEqual(inside,18)

    def test_one_hot_norm_is_exact(self):
        for seed in range(5):
            sk = SignSketch(jl_rows(0.3,0.1),seed=seed)
            sketch_update(sk,12345,-2.5)
            self.assertAlmostEqual(sketch_norm_sq(sk),6.25)

    def test_norm_of_fifty_items(self):
        sk = SignSketch(jl_rows(0.3,0.01),seed=11)
        sketch_update_many(sk,np.arange(1,51))
        self.assertGreater(sketch_norm_sq(sk),0.7 * 50)
        self.assertLess(sketch_norm_sq(sk),1.3 * 50)

    def test_norm_preserved_across_seeds(self):
        epsilon, delta = 0.3, 0.1
        rows = jl_rows(epsilon,delta)
        rng = np.random.default_rng(0)
        x = rng.normal(size=200)
        truth = float(np.dot(x,x))
        inside = 0
        for seed in range(20):
            sk = SignSketch(rows,seed=seed)
            sketch_update_many(sk,np.arange(200),x)
            inside += abs(sketch_norm_sq(sk) - truth) <= epsilon * truth
        self.assertGreaterEqual(inside,18)

    def test_expectation_over_all_hashes(self):
        # 1/p bias of the sign makes off-diagonal products contribute 1/p^2
        sk = SignSketch(625,seed=0,prime_modulus=5)
        sk.coefficients = all_coefficients(5)
        x = np.array([1.0,2.0,-1.0,3.0])
        sketch_update_many(sk,np.arange(4),x)
        cross = x.sum()**2 - np.dot(x,x)
        self.assertAlmostEqual(sketch_norm_sq(sk),np.dot(x,x) + cross / 25.0)
        self.assertAlmostEqual(sketch_norm_sq(sk),15.4)

    def test_memory_words(self):
        self.assertEqual(memory_words(SignSketch(100,seed=0)),600)
        self.assertEqual(memory_words(SignSketch(100,seed=0,width=5)),1000)
        ledger = MemoryLedger()
        sk = SignSketch(100,seed=0,ledger=ledger)
        self.assertEqual(ledger.words_live,600)
        sk.release()
        self.assertEqual(ledger.words_live,0)
        self.assertEqual(ledger.words_peak,600)
        with self.assertRaises(ContractError):
            ledger.release(1)

    def test_orthonormal_columns(self):
        rng = np.random.default_rng(2)
        Q, _ = np.linalg.qr(rng.normal(size=(64,3)))
        sk = SignSketch(400,seed=2,width=3)
        sketch_rows_update(sk,0,Q)
        s = np.linalg.svd(sk.image,compute_uv=False)
        self.assertTrue(np.all(s > 0.7))
        self.assertTrue(np.all(s < 1.3))

    def test_row_streaming_matches_batch(self):
        A = np.random.default_rng(3).normal(size=(50,4))
        a = SignSketch(25,seed=9,width=4)
        b = SignSketch(25,seed=9,width=4)
        for i, row in enumerate(A):
            sketch_row_update(a,i,row)
        sketch_rows_update(b,0,A)
        self.assertTrue(np.allclose(a.image,b.image))
        self.assertTrue(np.allclose(b.image,sign_matrix(b,np.arange(50)) @ A))

    def test_rejects_bad_updates(self):
        vector = SignSketch(10,seed=0)
        matrix = SignSketch(10,seed=0,width=2)
        with self.assertRaises(InputError):
            sketch_update(vector,1,float('nan'))
        with self.assertRaises(RangeError):
            sketch_update(vector,-3)
        with self.assertRaises(ContractError):
            sketch_update(matrix,1)
        with self.assertRaises(ContractError):
            sketch_rows_update(vector,0,np.ones((1,2)))
        with self.assertRaises(DimensionError):
            sketch_rows_update(matrix,0,np.ones((1,3)))
        with self.assertRaises(ContractError):
            sketch_norm_sq(matrix)
        with self.assertRaises(ConfigurationError):
            SignSketch(0,seed=0)

    def test_snapshot_is_independent(self):
        sk = SignSketch(10,seed=0)
        sketch_update(sk,3)
        frozen = snapshot(sk)
        sketch_update(sk,4)
        self.assertFalse(np.allclose(frozen.image,sk.image))
        self.assertEqual(frozen.items_seen,1)

    def test_row_hash_matches_signs(self):
        sk = SignSketch(5,seed=6)
        h = sk.row_hash(2)
        column = sign_matrix(sk,[17])[:,0] * np.sqrt(sk.rows)
        self.assertEqual(h.sign(17),int(round(column[2])))
        self.assertEqual(len(sk.row_hashes),5)
        self.assertIsNone(h.seed)
        self.assertEqual(new_four_wise_hash(9).seed,9)
        self.assertEqual(new_four_wise_hash(new_four_wise_hash(9).seed),new_four_wise_hash(9))

    def test_jl_rows(self):
        self.assertEqual(jl_rows(0.5,0.1,C=1.0),10)
        with self.assertRaises(ConfigurationError):
            jl_rows(0,0.1)

if __name__ == '__main__':
    unittest.main()
