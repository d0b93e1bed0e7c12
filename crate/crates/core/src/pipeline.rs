//! Per-post classification stage: noun extraction, topic assignment and
//! noun frequencies, joined with precomputed sentiment.

use rayon::prelude::*;

use crate::corpus::Post;
use crate::embedding::EmbeddingModel;
use crate::report::ClassifiedPost;
use crate::sentiment::SentimentClass;
use crate::text::{word_frequencies, TextPipeline};
use crate::topic::{classify, ClassifyOptions, TopicSet};

pub struct Classifier<'a> {
    pub model: &'a EmbeddingModel,
    pub topics: &'a TopicSet,
    pub text: &'a TextPipeline,
    pub options: ClassifyOptions,
}

#[derive(Debug, Clone)]
pub struct ClassifiedBatch {
    /// In input order.
    pub posts: Vec<ClassifiedPost>,
    /// Noun candidates dropped because the model does not know them.
    pub oov_dropped: usize,
}

impl Classifier<'_> {
    pub fn classify_post(&self, post: &Post, sentiment: SentimentClass) -> (ClassifiedPost, usize) {
        let extraction = self.text.nouns(&post.text, self.model);
        let classification = classify(&extraction.nouns, self.topics, self.model, self.options);
        let classified = ClassifiedPost::new(
            post.id.clone(),
            &classification,
            sentiment,
            word_frequencies(&extraction.nouns),
        );
        (classified, extraction.oov_dropped)
    }

    /// Classifies posts on the current rayon pool. Output order matches
    /// `posts` regardless of the pool size.
    ///
    /// Panics if `sentiments` and `posts` differ in length.
    pub fn classify_all(&self, posts: &[Post], sentiments: &[SentimentClass]) -> ClassifiedBatch {
        assert_eq!(posts.len(), sentiments.len());
        let results: Vec<(ClassifiedPost, usize)> = posts
            .par_iter()
            .zip(sentiments.par_iter())
            .map(|(p, &s)| self.classify_post(p, s))
            .collect();
        let oov_dropped = results.iter().map(|(_, n)| n).sum();
        ClassifiedBatch {
            posts: results.into_iter().map(|(p, _)| p).collect(),
            oov_dropped,
        }
    }
}
