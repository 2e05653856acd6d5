import unittest

import numpy as np

from exact_stream.generators import parse_descriptor, generate_stream, InvalidGenerator, ITEMS, POINTS, ROWS

class TestDescriptor(unittest.TestCase):
    def test_parse(self):
        self.assertEqual(parse_descriptor('gaussian-mixture(k=3,d=2)'),('gaussian-mixture',{'k': 3,'d': 2}))
        self.assertEqual(parse_descriptor('uniform-int'),('uniform-int',{}))
        self.assertEqual(parse_descriptor('uniform-int()'),('uniform-int',{}))
        name, args = parse_descriptor('zipf-int(N=100, s=1.5)')
        self.assertEqual(name,'zipf-int')
        self.assertEqual(args,{'N': 100,'s': 1.5})
        self.assertEqual(parse_descriptor('constant-item(c=7)')[1],{'c': 7})

    def test_parse_errors(self):
        with self.assertRaises(InvalidGenerator):
            parse_descriptor('uniform-int(N=)')
        with self.assertRaises(InvalidGenerator):
            parse_descriptor('uniform-int(N=3')
        with self.assertRaises(InvalidGenerator):
            parse_descriptor('uniform-int(N=3,N=4)')

class TestGenerators(unittest.TestCase):
    def test_constant_item(self):
        stream = generate_stream('constant-item(c=4)',0,5)
        self.assertEqual(stream.kind,ITEMS)
        self.assertEqual(stream.data.tolist(),[4,4,4,4,4])

    def test_deterministic(self):
        for spec in ('uniform-int(N=16)','zipf-int(N=50)','gaussian-mixture(k=2,d=3)','regression-rows(d=4)','matrix-pair(d=3,d_prime=2)'):
            self.assertEqual(generate_stream(spec,5,100),generate_stream(spec,5,100))
            self.assertNotEqual(generate_stream(spec,5,100),generate_stream(spec,6,100))

    def test_uniform_range(self):
        data = generate_stream('uniform-int(N=16)',1,5000).data
        self.assertEqual(data.min(),1)
        self.assertEqual(data.max(),16)

    def test_mixture_is_balanced(self):
        stream = generate_stream('gaussian-mixture(k=3,d=2,separation=20)',2,3000)
        self.assertEqual(stream.kind,POINTS)
        self.assertEqual(stream.data.shape,(3000,2))
        sizes = np.bincount(stream.meta['labels'],minlength=3)
        self.assertGreaterEqual(sizes.min() / 3000,0.2)
        centers = stream.meta['centers']
        gaps = [np.linalg.norm(centers[i] - centers[j]) for i in range(3) for j in range(i + 1,3)]
        self.assertAlmostEqual(min(gaps),20.0)

    def test_rows(self):
        stream = generate_stream('regression-rows(d=4,noise=0)',3,50)
        self.assertEqual(stream.kind,ROWS)
        self.assertTrue(np.allclose(stream.data @ stream.meta['planted'],stream.targets))
        pair = generate_stream('matrix-pair(d=3,d_prime=2)',3,40)
        self.assertEqual(pair.data.shape,(40,5))
        self.assertIsNone(pair.targets)
        self.assertEqual(pair.meta,{'d': 3,'d_prime': 2})

    def test_unknown(self):
        with self.assertRaises(InvalidGenerator):
            generate_stream('pareto-int(N=4)',0,10)
        with self.assertRaises(InvalidGenerator):
            generate_stream('uniform-int(M=4)',0,10)

    def test_out_of_range_values(self):
        with self.assertRaisesRegex(InvalidGenerator,'invalid values for uniform-int'):
            generate_stream('uniform-int(N=0)',0,10)
        with self.assertRaisesRegex(InvalidGenerator,'invalid values for gaussian-mixture'):
            generate_stream('gaussian-mixture(k=0)',0,10)
        with self.assertRaises(InvalidGenerator):
            generate_stream('regression-rows(d=-1)',0,10)

if __name__ == '__main__':
    unittest.main()
