// Regenerates tests/golden/baseline_providers.jsonl. Run only when the
// baseline feature hashing changes on purpose, and review the diff.
#include <iostream>
#include <memory>

#include "pathgls/providers.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_golden <output.jsonl>\n";
    return 1;
  }
  using namespace pathgls;
  auto store = std::make_shared<TranscriptStore>();

  RecordingTextEmbedder text(std::make_shared<BaselineTextEmbedder>(7, 64), store);
  text.embed_text("sheets of atypical cells");
  text.embed_text("tumor");

  Image tile = Image::blank(8, 8, 255, 255, 255);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x)
      if ((x + y) % 2 == 0) {
        auto* p = tile.px(x, y);
        p[0] = 120;
        p[1] = 40;
        p[2] = 160;
      }
  RecordingImageEmbedder image(std::make_shared<BaselineImageEmbedder>(7, 64), store);
  image.embed_image(tile);

  store->save(argv[1]);
  std::cout << "wrote " << store->size() << " entries to " << argv[1] << "\n";
  return 0;
}
