"""Hand-classified ideals for the unit-ideal test (True means the ideal is (1))."""

UNIT_IDEAL_CASES = [
    # (variables, generators, is the unit ideal)
    ("x", ["1"], True),
    ("x", ["x", "x - 1"], True),
    ("x", ["x^2 + 1", "x"], True),
    ("x", ["x^2 - 1", "x^3 - x + 2"], True),
    ("x", ["x^2"], False),
    ("x", ["x^2 + 1"], False),
    ("x", ["x^2 - 2", "x^4 - 4"], False),
    ("x", ["0"], False),
    ("x,y", ["x", "y", "x + y - 1"], True),
    ("x,y", ["x*y - 1", "x"], True),
    ("x,y", ["x*y - 1", "y"], True),
    ("x,y", ["y^2 - x^3", "2*y", "3*x^2", "y - 1"], True),
    ("x,y", ["x^2 + y^2 + 1", "x", "y"], True),
    ("x,y", ["x - 1", "y - 2", "x + y"], True),
    ("x,y", ["x^2", "y^2", "x*y - 1"], True),
    ("x,y", ["x*y", "x + y - 1", "x - y"], True),
    ("x,y", ["x^2 - y", "y - 1", "x"], True),
    ("x,y", ["x + 1", "x^2 - y^2", "y"], True),
    ("x,y", ["y^2 - x^3", "y - x"], False),
    ("x,y", ["y^2 - x^3", "2*y", "3*x^2"], False),
    ("x,y", ["x*y"], False),
    ("x,y", ["x", "y"], False),
    ("x,y", ["x^2 + y^2"], False),
    ("x,y", ["x^2 + y^2 + 1"], False),
    ("x,y", ["x*y - 1"], False),
    ("x,y", ["x^2 - y^3", "x^3 - y^5"], False),
    ("x,y", ["x - y^2", "y - x^2"], False),
    ("x,y", ["x^2 + 1", "y^2 + 1"], False),
    ("x,y", ["x*y - 1", "x - y"], False),
    ("x,y", ["x^3 - 1", "y^3 - 1", "x*y - 1"], False),
    ("x,y,z", ["x", "y", "z", "x + y + z + 1"], True),
    ("x,y,z", ["x*y*z - 1", "z"], True),
    ("x,y,z", ["x^2 - y*z", "x", "y - 1", "z - 1"], True),
    ("x,y,z", ["x + y + z", "x - y", "y - z", "x - 1"], True),
    ("x,y,z", ["x*y", "y*z", "x*z", "x + y + z - 1", "x - y", "y - z"], True),
    ("x,y,z", ["x^2 - y^2*z", "x", "y", "z - 1", "z"], True),
    ("x,y,z", ["x - y*z", "y - x*z", "z^2 - 1", "x - 1", "y - 2"], True),
    ("x,y,z", ["x^2 + y^2 + z^2 + 1", "x", "y", "z"], True),
    ("x,y,z", ["x*y - z", "z - 1", "x", "y"], True),
    ("x,y,z", ["x - 1", "y - 1", "z - 1", "x*y*z - 2"], True),
    ("x,y,z", ["x^2 - y^2*z"], False),
    ("x,y,z", ["x^2 - y^2*z", "2*x", "2*y*z", "y^2"], False),
    ("x,y,z", ["x", "y"], False),
    ("x,y,z", ["x*y*z"], False),
    ("x,y,z", ["x - y*z", "y - x*z"], False),
    ("x,y,z", ["x^2 + y^2 + z^2"], False),
    ("x,y,z", ["x*y - 1", "y*z - 1", "x*z - 1"], False),
    ("x,y,z", ["x + y + z", "x*y + y*z + x*z", "x*y*z"], False),
    ("x,y,z", ["x^2 + 1", "y^2 + 1", "z^2 + 1"], False),
    ("x,y,z", ["x - y^2", "y - z^2", "z - x^2"], False),
]
