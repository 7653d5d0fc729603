/** French participant-facing labels, kept out of the logic for localization. */
export const STRINGS = {
  appTitle: "Expérience d'écoute",
  contextIntro:
    "Imaginez que vous êtes installé·e à votre poste de travail, dans un " +
    "bureau ouvert. Les séquences sonores qui suivent représentent " +
    "l'ambiance sonore de ce lieu.",
  instructions:
    "Pour chaque groupe de quatre séquences, écoutez-les autant de fois que " +
    "vous le souhaitez, puis sélectionnez celle que vous jugez la plus " +
    "agréable et celle que vous jugez la moins agréable.",
  volumeNote: "Merci de ne pas toucher au volume de l'ordinateur.",
  startButton: "Commencer l'expérience",
  resumeButton: "Reprendre l'expérience",
  sequenceLabel: (index: number) => `Séquence ${index + 1}`,
  play: "Écouter",
  stop: "Arrêter",
  best: "La plus agréable",
  worst: "La moins agréable",
  submitTrial: "Valider",
  trialProgress: (current: number, total: number) => `Groupe ${current} / ${total}`,
  needBothChoices:
    "Veuillez sélectionner la séquence la plus agréable ET la moins agréable.",
  needDistinctChoices:
    "La même séquence ne peut pas être à la fois la plus et la moins agréable.",
  verbalizationTitle: "Description de sons",
  verbalizationPrompt:
    "Écoutez le son proposé et décrivez la source qui le produit.",
  verbalizationProgress: (current: number, total: number) => `Son ${current} / ${total}`,
  verbalizationPlaceholder: "Décrivez la source du son…",
  submitVerbalization: "Valider la description",
  needDescription: "Veuillez saisir une description avant de valider.",
  finishTitle: "C'est presque terminé",
  finishButton: "Terminer l'expérience",
  doneTitle: "Merci de votre participation !",
  doneBody: "Vos réponses ont bien été enregistrées.",
  networkRetry: "Problème de connexion, nouvelle tentative…",
  networkError:
    "La connexion au serveur a échoué. Vos réponses sont conservées ; " +
    "réessayez dans un instant.",
};
