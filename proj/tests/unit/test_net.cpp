#include <gtest/gtest.h>

#include <sstream>

#include "mtlw/autodiff/ops.hpp"
#include "mtlw/errors.hpp"
#include "mtlw/net/checkpoint.hpp"
#include "mtlw/net/multi_exit_net.hpp"
#include "support/oracles.hpp"

namespace ad = mtlw::ad;
namespace net = mtlw::net;

namespace {

net::NetConfig small_config(net::ExitAssignment exits = {1, 3, 5}) {
  net::NetConfig c;
  c.input_height = 32;
  c.input_width = 32;
  c.block_channels = {4, 4, 8, 8, 8};
  c.head_hidden = 8;
  c.exits = exits;
  return c;
}

ad::Tensor random_batch(const net::NetConfig& c, std::size_t b, std::uint64_t seed) {
  return ad::Tensor::from({b, c.input_channels, c.input_height, c.input_width},
                          oracle::uniform(b * c.input_channels * c.input_height * c.input_width, seed));
}

bool is_trunk(const std::string& name) { return name.rfind("block", 0) == 0; }

}  // namespace

TEST(ExitAssignment, RejectsOutOfRange) {
  EXPECT_THROW((net::ExitAssignment{0, 3, 5}.validate()), mtlw::StructuralError);
  EXPECT_THROW((net::ExitAssignment{1, 6, 5}.validate()), mtlw::StructuralError);
  EXPECT_NO_THROW((net::ExitAssignment{5, 5, 5}.validate()));
}

TEST(BuildNet, SameSeedGivesBitwiseIdenticalParameters) {
  const net::MultiExitNet a(small_config(), 7), b(small_config(), 7), c(small_config(), 8);
  EXPECT_EQ(a.snapshot(), b.snapshot());
  EXPECT_NE(a.snapshot(), c.snapshot());
}

TEST(BuildNet, BiasesStartAtZeroAndWeightsAreHeUniform) {
  const net::MultiExitNet n(small_config(), 3);
  for (const auto& p : n.parameters()) {
    if (p.name.ends_with(".bias")) {
      for (double v : p.tensor.values()) EXPECT_EQ(v, 0.0) << p.name;
    }
  }
  // block1.conv1 has fan-in 1 * 9.
  const double bound = std::sqrt(6.0 / 9.0);
  for (double v : n.parameter("block1.conv1.weight").values()) EXPECT_LE(std::abs(v), bound);
}

TEST(BuildNet, DefaultAssignmentAttachesHeadsAtNamedBlocks) {
  const net::MultiExitNet n(small_config({1, 3, 5}), 1);
  const auto& cfg = n.config();
  EXPECT_EQ(n.parameter("head.age.fc1.weight").dim(0), cfg.block_channels[0]);
  EXPECT_EQ(n.parameter("head.country.fc1.weight").dim(0), cfg.block_channels[2]);
  EXPECT_EQ(n.parameter("head.emotion.fc1.weight").dim(0), cfg.block_channels[4]);
}

TEST(BuildNet, EmotionExitFiveOn64x128GivesTwoByFour) {
  net::NetConfig c;  // 64 x 128 input
  const net::MultiExitNet n(c, 0);
  // Halving oracle.
  std::size_t h = 64, w = 128;
  for (int b = 0; b < c.exits.emotion_exit; ++b) h /= 2, w /= 2;
  EXPECT_EQ(n.block_output_dims(c.exits.emotion_exit), std::make_pair(h, w));
  EXPECT_EQ(n.block_output_dims(5), std::make_pair(std::size_t{2}, std::size_t{4}));
}

TEST(BuildNet, SpatialUnderflowNamesTheBlock) {
  net::NetConfig c = small_config();
  c.input_height = 16;  // survives 4 pools, not 5
  try {
    net::MultiExitNet n(c, 0);
    FAIL();
  } catch (const mtlw::StructuralError& e) {
    EXPECT_NE(std::string(e.what()).find("block 5"), std::string::npos) << e.what();
  }
  c.exits = {1, 3, 4};
  EXPECT_NO_THROW(net::MultiExitNet(c, 0));
}

TEST(Forward, OutputShapesAndRanges) {
  const net::MultiExitNet n(small_config(), 2);
  ad::Tape t(false);
  const auto out = n.forward(t, random_batch(n.config(), 2, 9));
  EXPECT_EQ(out.emotion.shape(), (ad::Shape{2, 10}));
  EXPECT_EQ(out.country_logits.shape(), (ad::Shape{2, 4}));
  EXPECT_EQ(out.age.shape(), (ad::Shape{2, 1}));
  for (double v : out.emotion.values()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Forward, AllZeroInputGivesZeroAge) {
  const net::MultiExitNet n(small_config(), 4);
  ad::Tape t(false);
  const auto& c = n.config();
  const auto out = n.forward(t, ad::Tensor::zeros({2, 1, c.input_height, c.input_width}));
  for (double v : out.age.values()) EXPECT_EQ(v, 0.0);
}

TEST(Forward, TrunkBlocksComputedOncePerForward) {
  const net::MultiExitNet n(small_config({1, 3, 5}), 4);
  ad::Tape t;
  const auto out = n.forward(t, random_batch(n.config(), 1, 2));
  EXPECT_EQ(out.blocks_evaluated, 5);
  std::size_t convs = 0;
  for (const auto& node : t.nodes()) convs += node.kind == ad::OpKind::kConv2d;
  EXPECT_EQ(convs, 10u);
}

TEST(Forward, ShapeMismatchIsStructural) {
  const net::MultiExitNet n(small_config(), 4);
  ad::Tape t;
  EXPECT_THROW(n.forward(t, ad::Tensor::zeros({1, 1, 32, 16})), mtlw::StructuralError);
  EXPECT_THROW(n.forward(t, ad::Tensor::zeros({1, 32, 32})), mtlw::StructuralError);
}

TEST(Forward, DeterministicBitwise) {
  const net::MultiExitNet n(small_config(), 5);
  const ad::Tensor x = random_batch(n.config(), 3, 6);
  ad::Tape t1(false), t2(false);
  const auto a = n.forward(t1, x), b = n.forward(t2, x);
  EXPECT_TRUE(std::equal(a.emotion.values().begin(), a.emotion.values().end(), b.emotion.values().begin()));
  EXPECT_TRUE(std::equal(a.age.values().begin(), a.age.values().end(), b.age.values().begin()));
  EXPECT_TRUE(std::equal(a.country_logits.values().begin(), a.country_logits.values().end(),
                         b.country_logits.values().begin()));
}

TEST(ParameterCount, SingleConvLayerHandCount) {
  const net::MultiExitNet n(net::NetConfig{}, 0);
  const auto& w = n.parameter("block1.conv1.weight");
  const auto& b = n.parameter("block1.conv1.bias");
  EXPECT_EQ(w.size() + b.size(), 160u);
}

TEST(ParameterCount, PureFunctionOfConfigAndMonotoneInHeadHidden) {
  const net::NetConfig c = small_config();
  EXPECT_EQ(net::parameter_count(net::MultiExitNet(c, 1)), net::parameter_count(net::MultiExitNet(c, 99)));
  net::NetConfig bigger = c;
  bigger.head_hidden += 1;
  EXPECT_GT(net::parameter_count(net::MultiExitNet(bigger, 1)), net::parameter_count(net::MultiExitNet(c, 1)));
  std::size_t manual = 0;
  const net::MultiExitNet n(c, 1);
  for (const auto& p : n.parameters()) manual += p.tensor.size();
  EXPECT_EQ(net::parameter_count(n), manual);
}

TEST(Invariants, MovingAnExitNeverChangesTrunkParameters) {
  const net::MultiExitNet a(small_config({1, 3, 5}), 11), b(small_config({2, 2, 4}), 11);
  std::vector<std::pair<std::string, std::vector<double>>> ta, tb;
  for (const auto& p : a.parameters()) {
    if (is_trunk(p.name)) ta.emplace_back(p.name, std::vector<double>(p.tensor.values().begin(), p.tensor.values().end()));
  }
  for (const auto& p : b.parameters()) {
    if (is_trunk(p.name)) tb.emplace_back(p.name, std::vector<double>(p.tensor.values().begin(), p.tensor.values().end()));
  }
  EXPECT_EQ(ta, tb);
  EXPECT_EQ(b.parameter("head.age.fc1.weight").dim(0), b.config().block_channels[1]);
  EXPECT_EQ(b.parameter("head.emotion.fc1.weight").dim(0), b.config().block_channels[3]);
}

TEST(Invariants, NoGradientReachesBlocksDeeperThanEveryExit) {
  net::MultiExitNet n(small_config({1, 2, 3}), 12);
  ad::Tape t;
  const auto out = n.forward(t, random_batch(n.config(), 2, 13));
  EXPECT_EQ(out.blocks_evaluated, 3);
  const auto loss = ad::add(t, ad::add(t, ad::sum(t, out.emotion), ad::sum(t, out.country_logits)),
                            ad::sum(t, ad::square(t, out.age)));
  t.backward(loss);
  for (const auto& p : n.parameters()) {
    const bool deep = p.name.rfind("block4", 0) == 0 || p.name.rfind("block5", 0) == 0;
    double norm = 0.0;
    for (double g : p.tensor.grad()) norm += std::abs(g);
    if (deep) {
      EXPECT_EQ(norm, 0.0) << p.name;
    } else if (p.name.ends_with(".weight")) {
      EXPECT_GT(norm, 0.0) << p.name;
    }
  }
}

TEST(Checkpoint, RoundTripRestoresConfigAndParametersBitwise) {
  const net::MultiExitNet n(small_config({2, 3, 4}), 21);
  std::stringstream buf;
  net::write_checkpoint(buf, n);
  EXPECT_EQ(buf.str().substr(0, 4), "MENC");
  const net::MultiExitNet back = net::read_checkpoint(buf);
  EXPECT_EQ(back.config(), n.config());
  EXPECT_EQ(back.snapshot(), n.snapshot());
  for (std::size_t i = 0; i < n.parameters().size(); ++i) {
    EXPECT_EQ(back.parameters()[i].name, n.parameters()[i].name);
  }
}

TEST(Checkpoint, BadMagicAndTruncationAreLoadErrors) {
  std::stringstream bad("NOPE....");
  EXPECT_THROW(net::read_checkpoint(bad), mtlw::LoadError);
  const net::MultiExitNet n(small_config(), 21);
  std::stringstream buf;
  net::write_checkpoint(buf, n);
  std::stringstream cut(buf.str().substr(0, buf.str().size() / 2));
  EXPECT_THROW(net::read_checkpoint(cut), mtlw::LoadError);
}

TEST(Checkpoint, SnapshotRestore) {
  net::MultiExitNet n(small_config(), 30);
  const auto saved = n.snapshot();
  n.parameters()[0].tensor.mutable_values()[0] += 1.0;
  EXPECT_NE(n.snapshot(), saved);
  n.restore(saved);
  EXPECT_EQ(n.snapshot(), saved);
}
