#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "edr/errors.hpp"
#include "edr/learner.hpp"
#include "test_support.hpp"

namespace edr {
namespace {

using testing::toy6;

std::vector<std::string> rendered(const DetectionRule& r, const GranularitySpec& spec) {
  std::vector<std::string> out;
  for (const auto& d : r.conditions) out.push_back(render(d, spec));
  return out;
}

LabelId id(const PredictionTable& t, const std::string& name) { return *t.spec().find_label(name); }

TEST(RatioDetRuleLearnTest, Toy6CoarseB) {
  const PredictionTable t = toy6();
  const auto rule = ratio_det_rule_learn(id(t, "B"), build_condition_set(t, 1, {}), t);
  ASSERT_TRUE(rule);
  EXPECT_EQ(rendered(*rule, t.spec()), (std::vector<std::string>{"assign[main,fine=a1]"}));
  EXPECT_EQ(rule->diagnostics.objective, Ratio(1, 3));
  EXPECT_EQ(rule->diagnostics.objective.scaled(2), Ratio(2, 3));
  EXPECT_EQ(rule->diagnostics.pos, 1u);
  EXPECT_EQ(rule->diagnostics.bod, 2u);
  EXPECT_EQ(rule->diagnostics.fp, 1u);
}

TEST(RatioDetRuleLearnTest, Toy6FineB1) {
  const PredictionTable t = toy6();
  const auto rule = ratio_det_rule_learn(id(t, "b1"), build_condition_set(t, 0, {}), t);
  ASSERT_TRUE(rule);
  EXPECT_EQ(rendered(*rule, t.spec()), (std::vector<std::string>{"assign[main,coarse=A]"}));
  EXPECT_EQ(rule->diagnostics.objective, Ratio(1, 2));
  EXPECT_EQ(rule->diagnostics.objective.scaled(2), Ratio(1, 1));
}

TEST(RatioDetRuleLearnTest, NoFalsePositivesMeansNoRule) {
  const PredictionTable t = toy6();
  EXPECT_FALSE(ratio_det_rule_learn(id(t, "A"), build_condition_set(t, 1, {}), t));
  EXPECT_FALSE(ratio_det_rule_learn(id(t, "a2"), build_condition_set(t, 0, {}), t));
}

TEST(RatioDetRuleLearnTest, NoCoveringConditionMeansNoRule) {
  // The only error of y=b is never covered by any condition.
  SampleMask pred(4), fps(4), cover(4);
  pred.set(0);
  pred.set(1);
  fps.set(0);
  cover.set(1);
  const ConditionSet cs(0, {{SourceKind::binary, 0}}, {Provenance::binary}, {cover});
  LearnStats stats;
  EXPECT_FALSE(ratio_det_rule_learn(ClassContext(0, pred, fps), cs, &stats));
  EXPECT_EQ(stats.evaluations, 1u);
}

TEST(RatioDetRuleLearnTest, PreconditionsAreChecked) {
  const PredictionTable t = toy6();
  EXPECT_THROW(ratio_det_rule_learn(id(t, "B"), build_condition_set(t, 0, {}), t), std::invalid_argument);
  ParseOptions options;
  options.labels = t.spec();
  const PredictionTable empty = parse_prediction_table(testing::data_path("header_only.csv"), options);
  EXPECT_THROW(ratio_det_rule_learn(0, build_condition_set(empty, 0, {}), empty), std::invalid_argument);
  EXPECT_THROW(learn_all(empty, build_all_condition_sets(empty, {})), std::invalid_argument);
}

// Greedy picks the cheapest marginal first but keeps the best prefix, which
// here is the longer one.
TEST(RatioDetRuleLearnTest, ReturnsBestPrefix) {
  // 8 predicted samples, 0..3 are errors. c0 covers {0} cleanly; c1 covers
  // {1,2,3,4}: one false alarm for three more hits.
  SampleMask pred = SampleMask::from_predicate(8, [](std::size_t) { return true; });
  SampleMask fps = SampleMask::from_predicate(8, [](std::size_t i) { return i < 4; });
  SampleMask c0 = SampleMask::from_indices(8, std::vector<std::size_t>{0});
  SampleMask c1 = SampleMask::from_indices(8, std::vector<std::size_t>{1, 2, 3, 4});
  SampleMask c2 = SampleMask::from_indices(8, std::vector<std::size_t>{5, 6, 7, 3});
  const ConditionSet cs(0, {{SourceKind::binary, 0}, {SourceKind::binary, 1}, {SourceKind::binary, 2}},
                        {Provenance::binary, Provenance::binary, Provenance::binary}, {c0, c1, c2});
  const auto rule = ratio_det_rule_learn(ClassContext(0, pred, fps), cs);
  ASSERT_TRUE(rule);
  // Prefix {c0}: 1/(1+4); {c0,c1}: 4/(5+4); {c0,c1} is also the optimum.
  EXPECT_EQ(rule->conditions.size(), 2u);
  EXPECT_EQ(rule->diagnostics.objective, Ratio(4, 9));
  EXPECT_EQ(brute_force_optimal(ClassContext(0, pred, fps), cs)->diagnostics.objective, Ratio(4, 9));
}

TEST(RatioDetRuleLearnTest, TiesBreakBySmallestConditionId) {
  SampleMask pred = SampleMask::all(4);
  SampleMask fps = SampleMask::from_indices(4, std::vector<std::size_t>{0});
  SampleMask both = SampleMask::from_indices(4, std::vector<std::size_t>{0});
  const ConditionSet cs(0, {{SourceKind::binary, 3}, {SourceKind::binary, 1}}, {Provenance::binary, Provenance::binary},
                        {both, both});
  const auto rule = ratio_det_rule_learn(ClassContext(0, pred, fps), cs);
  ASSERT_TRUE(rule);
  EXPECT_EQ(rule->conditions, (std::vector<ConditionDescriptor>{{SourceKind::binary, 3}}));
}

TEST(BruteForceOptimalTest, Toy6) {
  const PredictionTable t = toy6();
  const auto b = brute_force_optimal(id(t, "B"), build_condition_set(t, 1, {}), t);
  ASSERT_TRUE(b);
  EXPECT_EQ(rendered(*b, t.spec()), (std::vector<std::string>{"assign[main,fine=a1]"}));
  EXPECT_EQ(b->diagnostics.objective, Ratio(1, 3));

  const auto a1 = brute_force_optimal(id(t, "a1"), build_condition_set(t, 0, {}), t);
  ASSERT_TRUE(a1);
  EXPECT_EQ(rendered(*a1, t.spec()), (std::vector<std::string>{"assign[main,coarse=B]"}));
  EXPECT_EQ(a1->diagnostics.objective, Ratio(1, 3));

  EXPECT_FALSE(brute_force_optimal(id(t, "A"), build_condition_set(t, 1, {}), t));
}

TEST(BruteForceOptimalTest, RefusesLargeConditionSets) {
  Rng rng(1);
  const auto inst = testing::random_instance(rng, 32, 21);
  EXPECT_THROW(brute_force_optimal(inst.ctx, inst.conditions), std::invalid_argument);
  EXPECT_THROW(brute_force_optimal(inst.ctx, inst.conditions, 30), std::invalid_argument);
  EXPECT_NO_THROW(brute_force_optimal(inst.ctx, inst.conditions, 21));
}

// Exhaustive search agrees with a naive per-sample enumeration.
TEST(BruteForceOptimalTest, MatchesNaiveEnumeration) {
  Rng rng(31);
  for (int trial = 0; trial < 60; ++trial) {
    const PredictionTable t = testing::random_table(rng);
    const LabelId y = static_cast<LabelId>(rng.uniform(t.spec().label_count()));
    SourceToggles toggles;
    toggles.secondary = rng.bernoulli(0.5);
    const ConditionSet cs = build_condition_set(t, t.spec().granularity_of(y), toggles);
    Ratio best = Ratio::undefined();
    std::uint64_t best_pos = 0;
    for (std::uint32_t bits = 1; bits < (1u << cs.size()); ++bits) {
      std::vector<ConditionDescriptor> ds;
      for (ConditionId c = 0; c < cs.size(); ++c) {
        if (bits >> c & 1u) ds.push_back(cs[c].descriptor);
      }
      const auto n = testing::naive_counts(y, ds, t);
      const Ratio r(n.pos, n.bod + n.fp);
      if (r > best) {
        best = r;
        best_pos = n.pos;
      }
    }
    const auto bf = brute_force_optimal(y, cs, t);
    if (best_pos == 0) {
      EXPECT_FALSE(bf);
    } else {
      ASSERT_TRUE(bf);
      EXPECT_EQ(bf->diagnostics.objective, best);
    }
  }
}

// Sandwich, prefix dominance, strict POS growth and the evaluation bound.
TEST(RatioDetRuleLearnTest, GreedyProperties) {
  Rng rng(37);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t m = 1 + rng.uniform(12);
    const auto inst = testing::random_instance(rng, 1 + rng.uniform(256), m, 0.15);
    LearnStats stats;
    const auto greedy = ratio_det_rule_learn(inst.ctx, inst.conditions, &stats);
    const auto best = brute_force_optimal(inst.ctx, inst.conditions);
    EXPECT_LE(stats.evaluations, 2 * m * m + 3 * m);
    EXPECT_EQ(greedy.has_value(), best.has_value());
    if (!greedy) continue;
    EXPECT_LE(greedy->diagnostics.objective, best->diagnostics.objective);
    EXPECT_GE(greedy->diagnostics.pos, 1u);

    const auto ids = testing::ids_of(inst.conditions, greedy->conditions);
    std::uint64_t last_pos = 0;
    for (std::size_t i = 1; i <= ids.size(); ++i) {
      const std::span<const ConditionId> prefix(ids.data(), i);
      const std::uint64_t p = pos_count(inst.conditions, prefix, inst.ctx);
      EXPECT_GT(p, last_pos);
      last_pos = p;
      EXPECT_LE(objective(inst.conditions, prefix, inst.ctx), greedy->diagnostics.objective);
    }
    EXPECT_EQ(objective(inst.conditions, ids, inst.ctx), greedy->diagnostics.objective);
  }
}

TEST(LearnAllTest, Toy6) {
  const PredictionTable t = toy6();
  const RuleSet rules = learn_all(t, build_all_condition_sets(t, {}));
  std::vector<std::string> with_rules;
  for (const DetectionRule* r : rules.rules()) with_rules.push_back(t.spec().label_name(r->target));
  EXPECT_EQ(with_rules, (std::vector<std::string>{"a1", "b1", "B"}));
  EXPECT_FALSE(rules.rule(id(t, "A")));
  EXPECT_FALSE(rules.rule(id(t, "a2")));
  EXPECT_EQ(rendered(*rules.rule(id(t, "a1")), t.spec()), (std::vector<std::string>{"assign[main,coarse=B]"}));
}

TEST(LearnAllTest, PerfectPredictorLearnsNothing) {
  Rng rng(41);
  testing::RandomTableOptions o;
  o.main_accuracy = 1.0;
  const PredictionTable t = testing::random_table(rng, o);
  SourceToggles all;
  all.secondary = true;
  EXPECT_EQ(learn_all(t, build_all_condition_sets(t, all)).rule_count(), 0u);
}

TEST(LearnAllTest, AlwaysWrongWithAlwaysTrueCondition) {
  // Main is wrong everywhere; bin.on fires on every sample.
  std::istringstream in(
      "sample_id,gt.fine,gt.coarse,pred.main.fine,pred.main.coarse,bin.on\n"
      "s1,a,A,b,B,1\ns2,b,B,a,A,1\ns3,b,A,a,B,1\ns4,a,B,b,A,1\n");
  // `on` is a third fine label so the bin column has a home.
  GranularitySpec spec({{"fine", {"a", "b", "on"}}, {"coarse", {"A", "B"}}});
  ParseOptions options;
  options.labels = spec;
  const PredictionTable t = parse_prediction_table(in, options);
  SourceToggles bin;
  bin.binary = true;
  const RuleSet rules = learn_all(t, build_all_condition_sets(t, bin));
  for (LabelId y = 0; y < spec.label_count(); ++y) {
    const bool predicted = condition_mask({SourceKind::main, y}, t).count() > 0;
    ASSERT_EQ(rules.rule(y).has_value(), predicted) << spec.label_name(y);
    if (!predicted) continue;
    const auto& r = *rules.rule(y);
    EXPECT_EQ(r.diagnostics.pos, r.diagnostics.bod);
    EXPECT_EQ(r.diagnostics.pos, r.diagnostics.fp);
    // Every error is covered, at one false alarm per hit: the optimum 1/2.
    EXPECT_EQ(r.diagnostics.objective, Ratio(1, 2));
  }
}

TEST(LearnAllTest, DeterministicAndThreadIndependent) {
  Rng rng(43);
  for (int trial = 0; trial < 10; ++trial) {
    testing::RandomTableOptions o;
    o.max_samples = 300;
    const PredictionTable t = testing::random_table(rng, o);
    SourceToggles all;
    all.secondary = true;
    all.binary = !t.binary_labels().empty();
    const auto sets = build_all_condition_sets(t, all);
    const std::string one = to_json(learn_all(t, sets, 1)).dump();
    EXPECT_EQ(one, to_json(learn_all(t, sets, 1)).dump());
    EXPECT_EQ(one, to_json(learn_all(t, sets, 4)).dump());
  }
}

TEST(RuleIoTest, JsonRoundTripAndText) {
  const PredictionTable t = toy6();
  RuleSet rules = learn_all(t, build_all_condition_sets(t, {}));
  rules.config = {{"command", "learn"}};
  const auto j = to_json(rules);
  EXPECT_EQ(j["rules"]["B"]["conditions"], nlohmann::ordered_json::array({"assign[main,fine=a1]"}));
  EXPECT_EQ(j["rules"]["B"]["objective"], "1/3");
  EXPECT_EQ(j["rules"]["B"]["pos"], 1);
  EXPECT_EQ(j["rules"]["B"]["bod"], 2);
  EXPECT_EQ(j["rules"]["B"]["fp"], 1);
  EXPECT_TRUE(j["rules"]["A"].is_null());
  const RuleSet back = rule_set_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(to_json(back).dump(), j.dump());

  const std::string text = render_rules_text(rules);
  EXPECT_NE(text.find("error_B(X) <- assign[main,coarse=B](X) ∧ ( assign[main,fine=a1](X) )"), std::string::npos)
      << text;
}

TEST(RuleIoTest, RejectsMalformedRules) {
  const PredictionTable t = toy6();
  auto j = nlohmann::json::parse(to_json(learn_all(t, build_all_condition_sets(t, {}))).dump());
  auto bad = j;
  bad["rules"]["B"]["conditions"] = {"assign[main,coarse=A]"};  // main condition on its own granularity
  EXPECT_THROW(rule_set_from_json(bad), DataError);
  bad = j;
  bad["rules"]["zz"] = nullptr;
  EXPECT_THROW(rule_set_from_json(bad), DataError);
  bad = j;
  bad["rules"]["B"]["conditions"] = nlohmann::json::array();
  EXPECT_THROW(rule_set_from_json(bad), DataError);
}

}  // namespace
}  // namespace edr
