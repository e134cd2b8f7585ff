"""
Validity and context switches on a three-scenario suite
=======================================================

A noise sensor with three levels, an alarm and a photo feature.  The
suite below has one valid scenario and two broken ones; reordering it
changes how many context switches a tester has to perform.
"""

from scenariogen import creation_cost, is_valid_scenario, load_model, rearrange
from scenariogen.formats import fixture_text, suite_from_csv, suite_to_switch_table

model = load_model("mini")
print(model.context_names, model.feature_names)

# the table ships with the package; omitted root columns default to active
suite = suite_from_csv(fixture_text("three_scenarios.csv"), model)
for i, s in enumerate(suite, 1):
    print(i, s.active(), "valid" if is_valid_scenario(model, s) else "invalid")

# the default scenario has only the two roots active
t0 = model.default_scenario()
print("cost in table order:", creation_cost(suite, t0))
print("cost in order 2, 1, 3:", creation_cost(suite.reordered([1, 0, 2]), t0))

# greedy nearest neighbour is not optimal here
greedy = rearrange(suite, t0)
print("greedy order cost:", creation_cost(greedy, t0))

# the switch table is what a tester actually follows
print(suite_to_switch_table(suite))
