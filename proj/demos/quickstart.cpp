// Trains the hierarchical ELM on a synthetic 10:1 two-class set with and
// without class weighting and prints the held-out metrics.
#include <cstdio>

#include "serkit/serkit.hpp"

int main() {
  using namespace serkit;
  auto cfg = eval::synth_preset("imbalanced10to1");
  cfg.seed = 1;
  const FeatureMatrix train = eval::synth_imbalanced(cfg);
  cfg.seed = 2;
  const FeatureMatrix test = eval::synth_imbalanced(cfg);

  elm::HelmConfig helm;
  helm.seed = 42;
  for (auto kind : {elm::SchemeKind::none, elm::SchemeKind::W1, elm::SchemeKind::proposed}) {
    const auto model = elm::helm_train(train.X, train.labels, train.num_classes(), helm, {kind, 2.0});
    const auto pred = elm::predict(model, test.X);
    const auto r = eval::compute_metrics(test.labels, pred.labels, test.num_classes());
    std::printf("%-9s WAR %.4f  UAR %.4f  G-mean %.4f\n", elm::to_string(kind).c_str(), r.war, r.uar, r.gmean);
  }
  return 0;
}
