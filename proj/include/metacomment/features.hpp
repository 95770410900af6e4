#pragma once

#include "metacomment/features/anova.hpp"
#include "metacomment/features/extractor.hpp"
#include "metacomment/features/keywords.hpp"
#include "metacomment/features/registry.hpp"
#include "metacomment/features/semantic.hpp"
#include "metacomment/features/text_stats.hpp"
#include "metacomment/features/tfidf.hpp"
